#include "apxne/flowgame.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "apxne/bestresponse.hpp"
#include "apxne/error.hpp"

namespace apxne::flow {

double price_threshold(const FlowInstance& inst) {
  double mu = 0.0;
  for (const FlowPlayer& p : inst.players) {
    for (double v : p.mu) mu = std::max(mu, v);
  }
  double cap = 0.0;
  for (double c : inst.capacity) cap = std::max(cap, c);
  return inst.num_edges() * mu * cap;
}

double default_price_max(const FlowInstance& inst) { return std::floor(price_threshold(inst)) + 1.0; }

void validate(const FlowInstance& inst) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
  const int m = inst.num_edges();
  if (inst.num_nodes < 1) bad("flow instance needs at least one node");
  for (const Edge& e : inst.edges) {
    if (e.from < 0 || e.from >= inst.num_nodes || e.to < 0 || e.to >= inst.num_nodes || e.from == e.to) {
      bad("edge endpoints out of range or a self loop");
    }
  }
  if (static_cast<int>(inst.capacity.size()) != m || static_cast<int>(inst.target_load.size()) != m ||
      static_cast<int>(inst.price_max.size()) != m) {
    bad("capacity, target_load and price_max need one entry per edge");
  }
  for (int e = 0; e < m; ++e) {
    if (!(inst.capacity[e] >= 0.0) || std::floor(inst.capacity[e]) != inst.capacity[e]) {
      bad("capacities must be nonnegative integers");
    }
    if (!(inst.target_load[e] >= 0.0)) bad("target load must be nonnegative");
  }
  for (const FlowPlayer& p : inst.players) {
    if (p.source < 0 || p.source >= inst.num_nodes || p.sink < 0 || p.sink >= inst.num_nodes ||
        p.source == p.sink) {
      bad("player terminals out of range or equal");
    }
    if (!(p.demand >= 1.0) || std::floor(p.demand) != p.demand) bad("demand must be an integer >= 1");
    if (static_cast<int>(p.mu.size()) != m) bad("mu needs one entry per edge");
    for (double v : p.mu) {
      if (!(v >= 0.0)) bad("mu must be nonnegative");
    }
  }
  const double threshold = price_threshold(inst);
  for (double pm : inst.price_max) {
    if (!(pm > threshold)) {
      throw Error(ErrorCode::InvalidBound, "price bound " + std::to_string(pm) + " does not exceed " +
                                               std::to_string(threshold));
    }
  }
}

Game encode(const FlowInstance& inst) {
  validate(inst);
  const int m = inst.num_edges();
  const int n = static_cast<int>(inst.players.size());
  const int block = m + 1;
  const int price_off = n * block;

  std::vector<PlayerBlock> players;
  std::vector<LinearRow> rows;
  std::vector<QuadraticCost> costs;
  for (int i = 0; i < n; ++i) {
    const FlowPlayer& fp = inst.players[i];
    const int off = i * block;
    const int z = off + m;
    PlayerBlock b{block, 0, std::vector<double>(block, 0.0), inst.capacity};
    b.upper.push_back(1.0);
    players.push_back(std::move(b));

    for (int v = 0; v < inst.num_nodes; ++v) {
      SparseVec coeffs;
      for (int e = 0; e < m; ++e) {
        if (inst.edges[e].from == v) coeffs.push_back({off + e, 1.0});
        if (inst.edges[e].to == v) coeffs.push_back({off + e, -1.0});
      }
      const double supply = v == fp.source ? fp.demand : v == fp.sink ? -fp.demand : 0.0;
      if (supply != 0.0) coeffs.push_back({z, -supply});
      canonicalize(coeffs);
      if (coeffs.empty()) continue;
      SparseVec neg = coeffs;
      for (Entry& en : neg) en.value = -en.value;
      rows.push_back({i, std::move(coeffs), 0.0});
      rows.push_back({i, std::move(neg), 0.0});
    }
    for (int e = 0; e < m; ++e) {
      rows.push_back({i, {{off + e, 1.0}, {z, -inst.capacity[e]}}, 0.0});
    }
    QuadraticCost c;
    c.structure = CostStructure::BilinearOwnRival;
    for (int e = 0; e < m; ++e) {
      c.linear.push_back({off + e, -fp.mu[e]});
      c.quadratic.push_back({off + e, price_off + e, 1.0});
    }
    costs.push_back(std::move(c));
  }
  players.push_back({0, m, std::vector<double>(m, 0.0), inst.price_max});
  QuadraticCost auth;
  auth.structure = CostStructure::BilinearOwnRival;
  for (int e = 0; e < m; ++e) {
    auth.linear.push_back({price_off + e, inst.target_load[e]});
    for (int i = 0; i < n; ++i) auth.quadratic.push_back({i * block + e, price_off + e, -1.0});
  }
  costs.push_back(std::move(auth));
  Game g(Mode::Nep, std::move(players), std::move(rows), std::move(costs), true);
  validate_game(g);
  return g;
}

Decoded decode(const FlowInstance& inst, std::span<const double> profile) {
  const int m = inst.num_edges();
  const int n = static_cast<int>(inst.players.size());
  Decoded d;
  for (int i = 0; i < n; ++i) {
    const auto first = profile.begin() + i * (m + 1);
    d.flows.emplace_back(first, first + m);
    d.active.push_back(profile[i * (m + 1) + m]);
  }
  d.prices.assign(profile.begin() + n * (m + 1), profile.begin() + n * (m + 1) + m);
  return d;
}

std::vector<double> compose(const FlowInstance& inst, const std::vector<std::vector<double>>& flows,
                            std::span<const double> prices) {
  std::vector<double> x;
  for (const auto& f : flows) {
    x.insert(x.end(), f.begin(), f.end());
    const bool any = std::any_of(f.begin(), f.end(), [](double v) { return v != 0.0; });
    x.push_back(any ? 1.0 : 0.0);
  }
  x.insert(x.end(), prices.begin(), prices.begin() + inst.num_edges());
  return x;
}

namespace {

// Bounded draws on top of the raw engine output, so that instances do not
// depend on the standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
      v = rng_();
    } while (v >= limit);
    return lo + static_cast<int>(v % range);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int k = static_cast<int>(v.size()) - 1; k > 0; --k) std::swap(v[k], v[uniform(0, k)]);
  }

 private:
  std::mt19937_64 rng_;
};

std::vector<bool> reachable(int nodes, const std::vector<Edge>& edges, int from, bool reverse) {
  std::vector<bool> seen(nodes, false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const Edge& e : edges) {
      const int a = reverse ? e.to : e.from;
      const int b = reverse ? e.from : e.to;
      if (a == v && !seen[b]) {
        seen[b] = true;
        stack.push_back(b);
      }
    }
  }
  return seen;
}

}  // namespace

FlowInstance generate(const GenerateParams& params) {
  if (params.nodes < 2 || params.edges < params.nodes - 1 || params.players < 0 ||
      params.demand_min < 1 || params.demand_max < params.demand_min || params.mu_min < 0 ||
      params.mu_max < params.mu_min) {
    throw Error(ErrorCode::GenerationFailure, "invalid generator parameters");
  }
  Draw draw(params.seed);
  FlowInstance inst;
  inst.num_nodes = params.nodes;
  std::vector<int> order(params.nodes);
  for (int v = 0; v < params.nodes; ++v) order[v] = v;
  draw.shuffle(order);
  for (int k = 0; k + 1 < params.nodes; ++k) inst.edges.push_back({order[k], order[k + 1]});
  while (inst.num_edges() < params.edges) {
    const int a = draw.uniform(0, params.nodes - 1);
    const int b = draw.uniform(0, params.nodes - 2);
    inst.edges.push_back({a, b >= a ? b + 1 : b});
  }
  const int m = inst.num_edges();

  std::vector<double> shared_mu;
  if (params.identical_mu) {
    for (int e = 0; e < m; ++e) shared_mu.push_back(draw.uniform(params.mu_min, params.mu_max));
  }
  for (int i = 0; i < params.players; ++i) {
    FlowPlayer p;
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      p.source = params.same_source ? order[0] : draw.uniform(0, params.nodes - 1);
      const auto reach = reachable(params.nodes, inst.edges, p.source, false);
      std::vector<int> sinks;
      for (int v = 0; v < params.nodes; ++v) {
        if (reach[v] && v != p.source) sinks.push_back(v);
      }
      if (sinks.empty()) continue;
      p.sink = sinks[draw.uniform(0, static_cast<int>(sinks.size()) - 1)];
      placed = true;
    }
    if (!placed) throw Error(ErrorCode::GenerationFailure, "no terminal pair with a path");
    p.demand = draw.uniform(params.demand_min, params.demand_max);
    if (params.identical_mu) {
      p.mu = shared_mu;
    } else {
      for (int e = 0; e < m; ++e) p.mu.push_back(draw.uniform(params.mu_min, params.mu_max));
    }
    inst.players.push_back(std::move(p));
  }
  double cap = 1.0;
  for (const FlowPlayer& p : inst.players) cap = std::max(cap, p.demand);
  inst.capacity.assign(m, cap);

  // Target load: a random joint flow where each player either stays idle or
  // routes its demand along a random simple path.
  inst.target_load.assign(m, 0.0);
  for (const FlowPlayer& p : inst.players) {
    if (draw.uniform(0, 3) == 0) continue;
    const auto to_sink = reachable(params.nodes, inst.edges, p.sink, true);
    std::vector<bool> visited(params.nodes, false);
    std::vector<int> path;
    std::function<bool(int)> walk = [&](int v) {
      if (v == p.sink) return true;
      visited[v] = true;
      std::vector<int> out;
      for (int e = 0; e < m; ++e) {
        if (inst.edges[e].from == v && !visited[inst.edges[e].to] && to_sink[inst.edges[e].to]) out.push_back(e);
      }
      draw.shuffle(out);
      for (int e : out) {
        path.push_back(e);
        if (walk(inst.edges[e].to)) return true;
        path.pop_back();
      }
      return false;
    };
    if (!walk(p.source)) throw Error(ErrorCode::GenerationFailure, "path search failed");
    for (int e : path) inst.target_load[e] += p.demand;
  }
  inst.price_max.assign(m, default_price_max(inst));
  validate(inst);
  return inst;
}

ImplementationCheck check_implementation(const FlowInstance& inst,
                                         const std::vector<std::vector<double>>& flows,
                                         std::span<const double> prices) {
  constexpr double tol = 1e-9;
  const int m = inst.num_edges();
  ImplementationCheck out;
  std::vector<double> load(m, 0.0);
  for (const auto& f : flows) {
    for (int e = 0; e < m; ++e) load[e] += f[e];
  }
  out.load_within_target = true;
  out.slack_edges_free = true;
  out.prices_bounded = true;
  for (int e = 0; e < m; ++e) {
    out.load_within_target = out.load_within_target && load[e] <= inst.target_load[e] + tol;
    if (load[e] < inst.target_load[e] - tol) out.slack_edges_free = out.slack_edges_free && prices[e] <= tol;
    out.prices_bounded = out.prices_bounded && prices[e] >= -tol && prices[e] <= inst.price_max[e] + tol;
  }

  const Game game = encode(inst);
  const std::vector<double> profile = compose(inst, flows, prices);
  out.equilibrium = true;
  for (int i = 0; i < static_cast<int>(inst.players.size()); ++i) {
    const int off = game.offset(i);
    const int size = game.player(i).size();
    bool feasible = true;
    for (int j = off; j < off + size; ++j) {
      feasible = feasible && profile[j] >= game.lower(j) - tol && profile[j] <= game.upper(j) + tol;
    }
    for (int r : game.rows_of(i)) {
      const LinearRow& row = game.constraints()[r];
      feasible = feasible && dot(row.coeffs, profile) <= row.rhs + tol;
    }
    const BestResponse br = best_response(game, i, profile);
    out.equilibrium = out.equilibrium && feasible && eval_cost(game, i, profile) <= br.value + tol;
  }
  return out;
}

using Json = nlohmann::ordered_json;

FlowInstance parse_flow_instance(const std::string& document) {
  FlowInstance inst;
  try {
    const Json doc = Json::parse(document);
    inst.num_nodes = doc.at("num_nodes").get<int>();
    for (const Json& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "edges must be [from, to] pairs");
      inst.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    for (const Json& p : doc.at("players")) {
      FlowPlayer fp;
      fp.source = p.at("source").get<int>();
      fp.sink = p.at("sink").get<int>();
      fp.demand = p.at("demand").get<double>();
      fp.mu = p.at("mu").get<std::vector<double>>();
      inst.players.push_back(std::move(fp));
    }
    inst.capacity = doc.at("capacity").get<std::vector<double>>();
    inst.target_load = doc.at("target_load").get<std::vector<double>>();
    if (doc.contains("price_max")) {
      inst.price_max = doc["price_max"].get<std::vector<double>>();
    } else {
      inst.price_max.assign(inst.edges.size(), default_price_max(inst));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("flow instance: ") + e.what());
  }
  validate(inst);
  return inst;
}

std::string serialize_flow_instance(const FlowInstance& inst) {
  Json doc;
  doc["kind"] = "flow";
  doc["num_nodes"] = inst.num_nodes;
  doc["edges"] = Json::array();
  for (const Edge& e : inst.edges) doc["edges"].push_back(Json::array({e.from, e.to}));
  doc["players"] = Json::array();
  for (const FlowPlayer& p : inst.players) {
    doc["players"].push_back({{"source", p.source}, {"sink", p.sink}, {"demand", p.demand}, {"mu", p.mu}});
  }
  doc["capacity"] = inst.capacity;
  doc["target_load"] = inst.target_load;
  doc["price_max"] = inst.price_max;
  return doc.dump(2) + "\n";
}

}  // namespace apxne::flow
