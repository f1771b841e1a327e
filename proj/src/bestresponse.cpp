#include "apxne/bestresponse.hpp"

#include <cmath>
#include <limits>

#include "apxne/error.hpp"

namespace apxne {

MipResult mip_minimize(const std::vector<double>& objective, const MipRegion& region,
                       const MipOptions& options) {
  const int n = static_cast<int>(objective.size());
  if (region.empty) throw Error(ErrorCode::Infeasible, "region has a violated constant row");
  struct Pending {
    std::vector<double> lower;
    std::vector<double> upper;
  };
  lp::LpProblem problem{region.lower, region.upper, objective, region.rows};
  std::vector<Pending> stack{{region.lower, region.upper}};
  MipResult best;
  bool found = false;
  best.value = std::numeric_limits<double>::infinity();
  int nodes = 0;
  while (!stack.empty()) {
    Pending node = std::move(stack.back());
    stack.pop_back();
    if (++nodes > options.max_nodes) throw Error(ErrorCode::NumericalFailure, "best-response node limit");
    problem.lower = node.lower;
    problem.upper = node.upper;
    const lp::LpSolution sol = lp::solve_lp(problem);
    if (sol.status == lp::LpStatus::Infeasible) continue;
    if (found && sol.objective >= best.value - options.prune_gap) continue;

    int branch = -1;
    double most = options.integrality_tol;
    for (int j = 0; j < n; ++j) {
      if (!region.integer[j]) continue;
      const double f = sol.x[j] - std::floor(sol.x[j]);
      const double frac = std::min(f, 1.0 - f);
      if (frac > most) {
        most = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      std::vector<double> x = sol.x;
      for (int j = 0; j < n; ++j) {
        if (region.integer[j]) x[j] = std::round(x[j]);
      }
      double value = 0.0;
      for (int j = 0; j < n; ++j) value += objective[j] * x[j];
      if (!found || value < best.value - options.prune_gap) {
        best.x = std::move(x);
        best.value = value;
        found = true;
      }
      continue;
    }
    Pending up = node;
    up.lower[branch] = std::ceil(sol.x[branch]);
    node.upper[branch] = std::floor(sol.x[branch]);
    stack.push_back(std::move(up));
    stack.push_back(std::move(node));
  }
  if (!found) throw Error(ErrorCode::Infeasible, "no integer-feasible point");
  best.nodes = nodes;
  return best;
}

MipRegion own_region(const Game& game, int i, std::span<const double> profile) {
  const PlayerBlock& b = game.player(i);
  const int off = game.offset(i);
  MipRegion region;
  region.lower = b.lower;
  region.upper = b.upper;
  region.integer.assign(b.size(), false);
  for (int j = 0; j < b.num_int; ++j) region.integer[j] = true;
  for (int r : game.rows_of(i)) {
    const LinearRow& row = game.constraints()[r];
    lp::LpRow out;
    out.rhs = row.rhs;
    for (const Entry& e : row.coeffs) {
      if (game.owner_of(e.index) == i) {
        out.coeffs.push_back({e.index - off, e.value});
      } else {
        out.rhs -= e.value * profile[e.index];
      }
    }
    if (out.coeffs.empty()) {
      region.empty = region.empty || out.rhs < -1e-9;
      continue;
    }
    region.rows.push_back(std::move(out));
  }
  return region;
}

std::vector<double> own_objective(const Game& game, int i, std::span<const double> profile) {
  const int off = game.offset(i);
  std::vector<double> c(game.player(i).size(), 0.0);
  const QuadraticCost& cost = game.cost(i);
  for (const Entry& e : cost.linear) {
    if (game.owner_of(e.index) == i) c[e.index - off] += e.value;
  }
  for (const QuadTerm& t : cost.quadratic) {
    const bool own_a = game.owner_of(t.a) == i;
    const bool own_b = game.owner_of(t.b) == i;
    if (own_a && own_b) throw Error(ErrorCode::UnsupportedTerm, "own x own term in best response");
    if (own_a) c[t.a - off] += t.coeff * profile[t.b];
    if (own_b) c[t.b - off] += t.coeff * profile[t.a];
  }
  return c;
}

BestResponse best_response(const Game& game, int i, std::span<const double> profile,
                           const MipOptions& options) {
  const MipRegion region = own_region(game, i, profile);
  const std::vector<double> c = own_objective(game, i, profile);
  MipResult mip;
  try {
    mip = mip_minimize(c, region, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    throw Error(ErrorCode::Infeasible, "player " + std::to_string(i) + " has no feasible strategy");
  }
  BestResponse br;
  br.player = i;
  br.y = std::move(mip.x);
  br.value = eval_cost_with(game, i, br.y, profile);
  br.nodes = mip.nodes;
  return br;
}

}  // namespace apxne
