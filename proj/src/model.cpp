#include "apxne/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "apxne/error.hpp"

namespace apxne {

std::string to_string(Mode mode) { return mode == Mode::Nep ? "NEP" : "GNEP"; }

std::string to_string(CostStructure s) {
  switch (s) {
    case CostStructure::ConvexInAll: return "ConvexInAll";
    case CostStructure::ConcaveAllLinearInRivals: return "ConcaveAllLinearInRivals";
    case CostStructure::BilinearOwnRival: return "BilinearOwnRival";
  }
  return "ConvexInAll";
}

Mode parse_mode(const std::string& text) {
  if (text == "NEP") return Mode::Nep;
  if (text == "GNEP") return Mode::Gnep;
  throw Error(ErrorCode::ParseError, "unknown mode '" + text + "'");
}

CostStructure parse_structure(const std::string& text) {
  if (text == "ConvexInAll") return CostStructure::ConvexInAll;
  if (text == "ConcaveAllLinearInRivals") return CostStructure::ConcaveAllLinearInRivals;
  if (text == "BilinearOwnRival") return CostStructure::BilinearOwnRival;
  throw Error(ErrorCode::ParseError, "unknown cost structure '" + text + "'");
}

double QuadraticCost::eval(std::span<const double> x) const {
  double v = constant + dot(linear, x);
  for (const QuadTerm& t : quadratic) v += t.coeff * x[t.a] * x[t.b];
  return v;
}

std::vector<double> QuadraticCost::gradient(std::span<const double> x) const {
  std::vector<double> g(x.size(), 0.0);
  for (const Entry& e : linear) g[e.index] += e.value;
  for (const QuadTerm& t : quadratic) {
    g[t.a] += t.coeff * x[t.b];
    g[t.b] += t.coeff * x[t.a];
  }
  return g;
}

Game::Game(Mode mode, std::vector<PlayerBlock> players, std::vector<LinearRow> constraints,
           std::vector<QuadraticCost> costs, bool integrality_flag)
    : mode_(mode),
      players_(std::move(players)),
      constraints_(std::move(constraints)),
      costs_(std::move(costs)),
      integrality_flag_(integrality_flag) {
  for (LinearRow& row : constraints_) canonicalize(row.coeffs);
  for (QuadraticCost& c : costs_) canonicalize(c.linear);
  offsets_.reserve(players_.size());
  for (std::size_t i = 0; i < players_.size(); ++i) {
    const PlayerBlock& b = players_[i];
    offsets_.push_back(num_vars_);
    for (int j = 0; j < b.size(); ++j) {
      owner_.push_back(static_cast<int>(i));
      integer_.push_back(j < b.num_int);
      lower_.push_back(j < static_cast<int>(b.lower.size()) ? b.lower[j] : 0.0);
      upper_.push_back(j < static_cast<int>(b.upper.size()) ? b.upper[j] : 0.0);
    }
    num_vars_ += b.size();
  }
}

std::vector<int> Game::rows_of(int i) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < constraints_.size(); ++r) {
    if (constraints_[r].owner == i) out.push_back(static_cast<int>(r));
  }
  return out;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationError, what); }

Eigen::MatrixXd quadratic_matrix(const QuadraticCost& cost, const std::vector<int>& vars) {
  const auto n = static_cast<Eigen::Index>(vars.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  auto pos = [&](int v) {
    return static_cast<Eigen::Index>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
  };
  for (const QuadTerm& t : cost.quadratic) {
    const auto a = pos(t.a);
    const auto b = pos(t.b);
    if (a == b) {
      q(a, a) += t.coeff;
    } else {
      q(a, b) += 0.5 * t.coeff;
      q(b, a) += 0.5 * t.coeff;
    }
  }
  return q;
}

std::vector<int> quadratic_vars(const QuadraticCost& cost) {
  std::vector<int> vars;
  for (const QuadTerm& t : cost.quadratic) {
    vars.push_back(t.a);
    vars.push_back(t.b);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

}  // namespace

void validate_game(const Game& game, const ValidationOptions& options) {
  const int n = game.num_players();
  const int nx = game.num_vars();
  if (n < 1) invalid("game has no players");
  for (int i = 0; i < n; ++i) {
    const PlayerBlock& b = game.player(i);
    if (b.num_int < 0 || b.num_cont < 0) invalid("negative variable count for player " + std::to_string(i));
    if (static_cast<int>(b.lower.size()) != b.size() || static_cast<int>(b.upper.size()) != b.size()) {
      invalid("bound vectors of player " + std::to_string(i) + " do not match k + l");
    }
    for (int j = 0; j < b.size(); ++j) {
      if (!std::isfinite(b.lower[j]) || !std::isfinite(b.upper[j])) {
        invalid("player " + std::to_string(i) + " variable " + std::to_string(j) + " is unbounded");
      }
      if (b.lower[j] > b.upper[j]) {
        invalid("player " + std::to_string(i) + " variable " + std::to_string(j) + " has lower > upper");
      }
      if (j < b.num_int && (std::floor(b.lower[j]) != b.lower[j] || std::floor(b.upper[j]) != b.upper[j])) {
        invalid("integer variable with fractional bound (player " + std::to_string(i) + ")");
      }
    }
  }
  for (std::size_t r = 0; r < game.constraints().size(); ++r) {
    const LinearRow& row = game.constraints()[r];
    if (row.owner < 0 || row.owner >= n) invalid("constraint " + std::to_string(r) + " has invalid owner");
    if (!std::isfinite(row.rhs)) invalid("constraint " + std::to_string(r) + " has non-finite rhs");
    for (const Entry& e : row.coeffs) {
      if (e.index < 0 || e.index >= nx) invalid("constraint " + std::to_string(r) + " index out of range");
      if (!std::isfinite(e.value)) invalid("constraint " + std::to_string(r) + " has non-finite coefficient");
      if (game.mode() == Mode::Nep && game.owner_of(e.index) != row.owner) {
        invalid("NEP constraint " + std::to_string(r) + " references a rival variable");
      }
    }
  }
  if (static_cast<int>(game.costs().size()) != n) invalid("expected one cost per player");
  for (int i = 0; i < n; ++i) {
    const QuadraticCost& c = game.cost(i);
    for (const Entry& e : c.linear) {
      if (e.index < 0 || e.index >= nx) invalid("cost " + std::to_string(i) + " linear index out of range");
    }
    for (const QuadTerm& t : c.quadratic) {
      if (t.a < 0 || t.a >= nx || t.b < 0 || t.b >= nx) {
        invalid("cost " + std::to_string(i) + " quadratic index out of range");
      }
      const bool own_a = game.owner_of(t.a) == i;
      const bool own_b = game.owner_of(t.b) == i;
      if (options.reject_own_quadratic && own_a && own_b) {
        invalid("cost " + std::to_string(i) + " has a quadratic term in own variables");
      }
      switch (c.structure) {
        case CostStructure::BilinearOwnRival:
          if (own_a == own_b) invalid("cost " + std::to_string(i) + " tagged BilinearOwnRival has a non own x rival term");
          break;
        case CostStructure::ConcaveAllLinearInRivals:
          if (!own_a && !own_b) invalid("cost " + std::to_string(i) + " is not linear in rivals");
          break;
        case CostStructure::ConvexInAll:
          break;
      }
    }
    if (c.structure == CostStructure::BilinearOwnRival || c.quadratic.empty()) continue;
    const std::vector<int> vars = quadratic_vars(c);
    const Eigen::MatrixXd q = quadratic_matrix(c, vars);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (c.structure == CostStructure::ConvexInAll && ev.minCoeff() < -options.eigen_tol) {
      invalid("cost " + std::to_string(i) + " tagged ConvexInAll is not positive semidefinite");
    }
    if (c.structure == CostStructure::ConcaveAllLinearInRivals && ev.maxCoeff() > options.eigen_tol) {
      invalid("cost " + std::to_string(i) + " tagged ConcaveAllLinearInRivals is not negative semidefinite");
    }
  }
}

double eval_cost(const Game& game, int i, std::span<const double> x) { return game.cost(i).eval(x); }

double eval_cost_with(const Game& game, int i, std::span<const double> own, std::span<const double> x) {
  std::vector<double> z(x.begin(), x.end());
  std::copy(own.begin(), own.end(), z.begin() + game.offset(i));
  return game.cost(i).eval(z);
}

std::vector<double> eval_constraints(const Game& game, std::span<const double> x) {
  std::vector<double> g;
  g.reserve(game.constraints().size());
  for (const LinearRow& row : game.constraints()) g.push_back(dot(row.coeffs, x) - row.rhs);
  return g;
}

double max_violation(const Game& game, std::span<const double> x) {
  double v = 0.0;
  for (double r : eval_constraints(game, x)) v = std::max(v, r);
  return v;
}

namespace {

std::pair<double, double> product_range(double a1, double a2, double b1, double b2) {
  const double c[4] = {a1 * b1, a1 * b2, a2 * b1, a2 * b2};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

std::pair<double, double> square_range(double a1, double a2) {
  const double s1 = a1 * a1;
  const double s2 = a2 * a2;
  if (a1 <= 0.0 && a2 >= 0.0) return {0.0, std::max(s1, s2)};
  return {std::min(s1, s2), std::max(s1, s2)};
}

std::pair<double, double> scaled(std::pair<double, double> r, double c) {
  return c >= 0.0 ? std::pair{c * r.first, c * r.second} : std::pair{c * r.second, c * r.first};
}

}  // namespace

std::pair<double, double> cost_range(const QuadraticCost& cost, std::span<const double> lower,
                                     std::span<const double> upper) {
  const std::size_t nx = lower.size();
  std::vector<int> parent(nx);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> in_quad(nx, false);
  for (const QuadTerm& t : cost.quadratic) {
    in_quad[t.a] = in_quad[t.b] = true;
    parent[find(t.a)] = find(t.b);
  }
  std::map<int, std::vector<int>> components;
  for (std::size_t v = 0; v < nx; ++v) {
    if (in_quad[v]) components[find(static_cast<int>(v))].push_back(static_cast<int>(v));
  }

  double lo = cost.constant;
  double hi = cost.constant;
  for (const Entry& e : cost.linear) {
    if (in_quad[e.index]) continue;
    const auto r = scaled({lower[e.index], upper[e.index]}, e.value);
    lo += r.first;
    hi += r.second;
  }
  for (const auto& [root, vars] : components) {
    std::vector<const QuadTerm*> terms;
    bool has_square = false;
    for (const QuadTerm& t : cost.quadratic) {
      if (find(t.a) == root) {
        terms.push_back(&t);
        has_square = has_square || t.a == t.b;
      }
    }
    std::vector<double> lin(vars.size(), 0.0);
    for (std::size_t k = 0; k < vars.size(); ++k) lin[k] = coefficient(cost.linear, vars[k]);

    if (!has_square && vars.size() <= 16) {
      std::vector<double> point(nx, 0.0);
      double cmin = std::numeric_limits<double>::infinity();
      double cmax = -cmin;
      for (std::uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
        double v = 0.0;
        for (std::size_t k = 0; k < vars.size(); ++k) {
          const int var = vars[k];
          point[var] = (mask >> k) & 1u ? upper[var] : lower[var];
          v += lin[k] * point[var];
        }
        for (const QuadTerm* t : terms) v += t->coeff * point[t->a] * point[t->b];
        cmin = std::min(cmin, v);
        cmax = std::max(cmax, v);
      }
      lo += cmin;
      hi += cmax;
      continue;
    }
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const auto r = scaled({lower[vars[k]], upper[vars[k]]}, lin[k]);
      lo += r.first;
      hi += r.second;
    }
    for (const QuadTerm* t : terms) {
      const auto base = t->a == t->b ? square_range(lower[t->a], upper[t->a])
                                     : product_range(lower[t->a], upper[t->a], lower[t->b], upper[t->b]);
      const auto r = scaled(base, t->coeff);
      lo += r.first;
      hi += r.second;
    }
  }
  return {lo, hi};
}

ProxyBounds compute_proxy_bounds(const Game& game) {
  ProxyBounds b;
  for (int i = 0; i < game.num_players(); ++i) {
    const auto [lo, hi] = cost_range(game.cost(i), game.lower_bounds(), game.upper_bounds());
    b.phi_plus.push_back(hi);
    b.pihat_minus.push_back(lo);
  }
  return b;
}

bool ExtendedGame::is_integer(int ext) const {
  return ext < num_base_vars() ? base_.is_integer(ext) : aux_[ext - num_base_vars()].integer;
}

double ExtendedGame::lower(int ext) const {
  return ext < num_base_vars() ? base_.lower(ext) : aux_[ext - num_base_vars()].lower;
}

double ExtendedGame::upper(int ext) const {
  return ext < num_base_vars() ? base_.upper(ext) : aux_[ext - num_base_vars()].upper;
}

std::optional<int> ExtendedGame::product_of(int a, int b) const {
  const auto key = std::minmax(a, b);
  for (const ProductLink& p : products_) {
    if (std::minmax(p.expanded, p.other) == key) return p.aux;
  }
  return std::nullopt;
}

std::vector<double> ExtendedGame::lift(std::span<const double> x) const {
  std::vector<double> z(x.begin(), x.end());
  z.resize(num_vars(), 0.0);
  for (const Expansion& e : expansions_) {
    if (e.bits.size() == 1 && e.bits[0] == e.var) continue;
    const auto r = static_cast<long long>(std::llround(x[e.var] - e.offset));
    for (std::size_t k = 0; k < e.bits.size(); ++k) z[e.bits[k]] = static_cast<double>((r >> k) & 1LL);
  }
  for (std::size_t p = 0; p < products_.size(); ++p) {
    const ProductLink& link = products_[p];
    const double xi = std::round(x[link.expanded]);
    z[link.aux] = xi * x[link.other];
    const auto& e = *std::find_if(expansions_.begin(), expansions_.end(),
                                  [&](const Expansion& ex) { return ex.var == link.expanded; });
    const auto& vs = product_bits_[p];
    for (std::size_t k = 0; k < vs.size(); ++k) {
      if (vs[k] != link.aux) z[vs[k]] = z[e.bits[k]] * x[link.other];
    }
  }
  return z;
}

std::pair<double, SparseVec> ExtendedGame::linearized_cost(int i) const {
  const QuadraticCost& c = base_.cost(i);
  SparseVec lin = c.linear;
  for (const QuadTerm& t : c.quadratic) {
    const auto w = product_of(t.a, t.b);
    if (!w) throw Error(ErrorCode::UnsupportedTerm, "quadratic term without product variable");
    lin.push_back({*w, t.coeff});
  }
  canonicalize(lin);
  return {c.constant, std::move(lin)};
}

ExtendedGame linearize_bilinear(const Game& game) {
  ExtendedGame eg;
  eg.base_ = game;
  const int nx = game.num_vars();
  auto add_aux = [&](AuxKind kind, double lo, double hi, bool integer) {
    eg.aux_.push_back({kind, lo, hi, integer});
    return nx + static_cast<int>(eg.aux_.size()) - 1;
  };
  auto add_row = [&](SparseVec coeffs, double rhs) {
    canonicalize(coeffs);
    eg.rows_.push_back({-1, std::move(coeffs), rhs});
  };
  auto add_eq = [&](SparseVec coeffs, double rhs) {
    SparseVec neg = coeffs;
    for (Entry& e : neg) e.value = -e.value;
    add_row(std::move(coeffs), rhs);
    add_row(std::move(neg), -rhs);
  };
  auto expansion_of = [&](int var) -> const ExtendedGame::Expansion& {
    for (const auto& e : eg.expansions_) {
      if (e.var == var) return e;
    }
    const double lo = game.lower(var);
    const double hi = game.upper(var);
    ExtendedGame::Expansion e{var, lo, {}};
    if (lo == 0.0 && hi == 1.0) {
      e.bits.push_back(var);
    } else {
      const auto range = static_cast<unsigned long long>(hi - lo);
      const int nbits = range == 0 ? 0 : static_cast<int>(std::bit_width(range));
      SparseVec link{{var, 1.0}};
      for (int k = 0; k < nbits; ++k) {
        const int z = add_aux(AuxKind::Bit, 0.0, 1.0, true);
        e.bits.push_back(z);
        link.push_back({z, -std::ldexp(1.0, k)});
      }
      add_eq(std::move(link), lo);
    }
    eg.expansions_.push_back(std::move(e));
    return eg.expansions_.back();
  };
  auto mccormick = [&](int z, int p, int v, double pl, double pu) {
    add_row({{v, -1.0}, {z, pl}}, 0.0);               // v >= pl z
    add_row({{v, 1.0}, {z, -pu}}, 0.0);               // v <= pu z
    add_row({{p, 1.0}, {z, pu}, {v, -1.0}}, pu);      // v >= p - pu (1 - z)
    add_row({{v, 1.0}, {p, -1.0}, {z, -pl}}, -pl);    // v <= p - pl (1 - z)
  };

  for (int i = 0; i < game.num_players(); ++i) {
    for (const QuadTerm& t : game.cost(i).quadratic) {
      if (eg.product_of(t.a, t.b)) continue;
      const bool ia = game.is_integer(t.a);
      const bool ib = game.is_integer(t.b);
      if (!ia && !ib) {
        throw Error(ErrorCode::UnsupportedTerm, "continuous x continuous product of variables " +
                                                    std::to_string(t.a) + " and " + std::to_string(t.b));
      }
      int expanded = ia ? t.a : t.b;
      if (ia && ib) {
        const double ra = game.upper(t.a) - game.lower(t.a);
        const double rb = game.upper(t.b) - game.lower(t.b);
        expanded = (rb < ra || (rb == ra && t.b < t.a)) ? t.b : t.a;
      }
      const int other = expanded == t.a ? t.b : t.a;
      const double pl = game.lower(other);
      const double pu = game.upper(other);
      const double xl = game.lower(expanded);
      const double xu = game.upper(expanded);
      const auto wr = expanded == other ? square_range(xl, xu) : product_range(xl, xu, pl, pu);
      const auto& exp = expansion_of(expanded);
      const std::vector<int> bits = exp.bits;
      const double offset = exp.offset;
      const int w = add_aux(AuxKind::Product, wr.first, wr.second, false);
      std::vector<int> vs;
      if (bits.size() == 1 && bits[0] == expanded) {
        mccormick(expanded, other, w, pl, pu);
        vs.push_back(w);
      } else {
        SparseVec link{{w, 1.0}};
        if (offset != 0.0) link.push_back({other, -offset});
        for (std::size_t k = 0; k < bits.size(); ++k) {
          const int v = add_aux(AuxKind::BitProduct, std::min(0.0, pl), std::max(0.0, pu), false);
          mccormick(bits[k], other, v, pl, pu);
          vs.push_back(v);
          link.push_back({v, -std::ldexp(1.0, static_cast<int>(k))});
        }
        add_eq(std::move(link), 0.0);
      }
      eg.products_.push_back({expanded, other, w});
      eg.product_bits_.push_back(std::move(vs));
    }
  }
  return eg;
}

}  // namespace apxne
