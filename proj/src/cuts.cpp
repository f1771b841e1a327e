#include "apxne/cuts.hpp"

#include <cmath>
#include <limits>

#include "apxne/error.hpp"

namespace apxne {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LiftedLayout::LiftedLayout(const Game& game, int aux_count)
    : nx(game.num_vars()), players(game.num_players()), num_aux(aux_count) {}

std::string to_string(CutKind kind) {
  switch (kind) {
    case CutKind::IcPhi: return "ic_phi";
    case CutKind::IcPiConv: return "ic_pi_conv";
    case CutKind::IcPiConc: return "ic_pi_conc";
    case CutKind::BrCut: return "br";
    case CutKind::RootPiHat: return "root_pihat";
  }
  return "br";
}

double QuadForm::eval(std::span<const double> z) const {
  double v = constant + dot(linear, z);
  for (const QuadTerm& t : quadratic) v += t.coeff * z[t.a] * z[t.b];
  return v;
}

double QuadForm::slope(std::span<const double> z, std::span<const double> r) const {
  double v = dot(linear, r);
  for (const QuadTerm& t : quadratic) v += t.coeff * (z[t.a] * r[t.b] + z[t.b] * r[t.a]);
  return v;
}

double QuadForm::curvature(std::span<const double> r) const {
  double v = 0.0;
  for (const QuadTerm& t : quadratic) v += t.coeff * r[t.a] * r[t.b];
  return v;
}

bool FreeSet::contains(std::span<const double> z, double margin) const {
  for (const QuadForm& p : parts) {
    if (p.eval(z) > -margin) return false;
  }
  return true;
}

CutTargets dispatch_cut_targets(const Game& game, const LiftedLayout& layout, std::span<const double> z,
                                const std::vector<BestResponse>& br, const CutOptions& options) {
  CutTargets t;
  const std::span<const double> x = z.first(layout.nx);
  for (int i = 0; i < game.num_players(); ++i) {
    if (z[layout.phi(i)] > br[i].value + options.dispatch_tol) t.phi.push_back(i);
    if (z[layout.pihat(i)] < eval_cost(game, i, x) - options.dispatch_tol) t.pihat.push_back(i);
  }
  if (t.phi.empty() && t.pihat.empty()) {
    throw Error(ErrorCode::DichotomyViolation,
                "integer point is not an equilibrium but no proxy is off its true value");
  }
  return t;
}

namespace {

void require_interior(const FreeSet& set, std::span<const double> z, const CutOptions& options) {
  if (!set.contains(z, options.interior_tol)) {
    throw Error(ErrorCode::NotInInterior, "target point is not interior to the free set of player " +
                                              std::to_string(set.player));
  }
}

}  // namespace

FreeSet build_free_set_phi(const Game& game, const LiftedLayout& layout, int i, std::span<const double> z,
                           const BestResponse& br, double eps, const CutOptions& options) {
  const int off = game.offset(i);
  auto own = [&](int v) { return game.owner_of(v) == i; };
  auto y = [&](int v) { return br.y[v - off]; };
  const QuadraticCost& cost = game.cost(i);

  QuadForm epi;
  epi.constant = cost.constant;
  for (const Entry& e : cost.linear) {
    if (own(e.index)) {
      epi.constant += e.value * y(e.index);
    } else {
      epi.linear.push_back(e);
    }
  }
  for (const QuadTerm& t : cost.quadratic) {
    if (own(t.a) && own(t.b)) {
      epi.constant += t.coeff * y(t.a) * y(t.b);
    } else if (own(t.a)) {
      epi.linear.push_back({t.b, t.coeff * y(t.a)});
    } else if (own(t.b)) {
      epi.linear.push_back({t.a, t.coeff * y(t.b)});
    } else {
      epi.quadratic.push_back(t);
    }
  }
  epi.linear.push_back({layout.phi(i), -1.0});
  canonicalize(epi.linear);

  FreeSet set;
  set.provenance = CutKind::IcPhi;
  set.player = i;
  set.kind = epi.quadratic.empty() ? FreeSetKind::PolyhedralOpen : FreeSetKind::ConvexEpigraph;
  set.parts.push_back(std::move(epi));
  for (int r : game.rows_of(i)) {
    const LinearRow& row = game.constraints()[r];
    QuadForm g;
    g.constant = -row.rhs - eps;
    for (const Entry& e : row.coeffs) {
      if (own(e.index)) {
        g.constant += e.value * y(e.index);
      } else {
        g.linear.push_back(e);
      }
    }
    if (g.linear.empty()) continue;  // constant row, satisfied by the feasible y*
    set.parts.push_back(std::move(g));
  }
  require_interior(set, z, options);
  return set;
}

FreeSet build_free_set_pi_conv(const Game& game, const LiftedLayout& layout, int i,
                               std::span<const double> z, const CutOptions& options) {
  const QuadraticCost& cost = game.cost(i);
  if (cost.structure != CostStructure::ConvexInAll && !cost.is_linear()) {
    throw Error(ErrorCode::WrongCostClass, "gradient free set needs a convex cost");
  }
  const std::span<const double> x = z.first(layout.nx);
  const std::vector<double> grad = cost.gradient(x);
  QuadForm h;
  h.constant = -cost.eval(x);
  for (int v = 0; v < layout.nx; ++v) {
    if (grad[v] == 0.0) continue;
    h.linear.push_back({v, -grad[v]});
    h.constant += grad[v] * x[v];
  }
  h.linear.push_back({layout.pihat(i), 1.0});
  canonicalize(h.linear);
  FreeSet set{FreeSetKind::GradientHalfspace, CutKind::IcPiConv, i, {std::move(h)}};
  require_interior(set, z, options);
  return set;
}

FreeSet build_free_set_pi_conc(const Game& game, const LiftedLayout& layout, int i,
                               std::span<const double> z, const CutOptions& options) {
  const QuadraticCost& cost = game.cost(i);
  if (cost.structure != CostStructure::ConcaveAllLinearInRivals && !cost.is_linear()) {
    throw Error(ErrorCode::WrongCostClass, "sublevel free set needs a concave cost");
  }
  QuadForm h;
  h.constant = -cost.constant;
  for (const Entry& e : cost.linear) h.linear.push_back({e.index, -e.value});
  for (const QuadTerm& t : cost.quadratic) h.quadratic.push_back({t.a, t.b, -t.coeff});
  h.linear.push_back({layout.pihat(i), 1.0});
  canonicalize(h.linear);
  FreeSet set{FreeSetKind::ConcaveSublevel, CutKind::IcPiConc, i, {std::move(h)}};
  require_interior(set, z, options);
  return set;
}

double step_length(const QuadForm& part, std::span<const double> z, std::span<const double> r) {
  const double c = part.eval(z);
  const double b = part.slope(z, r);
  const double a = part.curvature(r);
  if (c >= 0.0) return 0.0;
  if (a == 0.0) return b > 0.0 ? -c / b : kInf;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInf;  // only possible for a < 0: never reaches the boundary
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double best = kInf;
  for (double root : {q / a, q != 0.0 ? c / q : kInf}) {
    if (root > 0.0 && root < best) best = root;
  }
  return best;
}

double step_length_bisection(const QuadForm& part, std::span<const double> z, std::span<const double> r,
                             double eta_max) {
  std::vector<double> p(z.size());
  auto value_at = [&](double eta) {
    for (std::size_t k = 0; k < z.size(); ++k) p[k] = z[k] + eta * r[k];
    return part.eval(p);
  };
  if (value_at(0.0) >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (value_at(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > eta_max) return kInf;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (value_at(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo;
}

double free_set_step(const FreeSet& set, std::span<const double> z, std::span<const double> r,
                     const CutOptions& options) {
  double eta = kInf;
  for (const QuadForm& part : set.parts) {
    const double s = options.bisection_only ? step_length_bisection(part, z, r, options.eta_max)
                                            : step_length(part, z, r);
    eta = std::min(eta, s);
  }
  return eta > options.eta_max ? kInf : eta;
}

std::pair<SparseVec, double> nonbasic_combination(const lp::LpProblem& problem, const std::vector<lp::Ray>& rays,
                                                  const std::vector<double>& weights) {
  SparseVec coeffs;
  double constant = 0.0;
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const lp::NonbasicRef& src = rays[k].source;
    if (src.kind == lp::NonbasicRef::Kind::Structural) {
      if (src.at_upper) {
        coeffs.push_back({src.index, -w});
        constant += w * problem.upper[src.index];
      } else {
        coeffs.push_back({src.index, w});
        constant -= w * problem.lower[src.index];
      }
    } else {
      const lp::LpRow& row = problem.rows[src.index];
      for (const Entry& e : row.coeffs) coeffs.push_back({e.index, -w * e.value});
      constant += w * row.rhs;
    }
  }
  canonicalize(coeffs);
  return {std::move(coeffs), constant};
}

Cut intersection_cut(const lp::LpProblem& problem, const lp::LpSolution& solution,
                     const std::vector<lp::Ray>& rays, const FreeSet& set, const CutOptions& options) {
  const std::span<const double> z = solution.x;
  require_interior(set, z, options);
  std::vector<double> weights(rays.size(), 0.0);
  bool any = false;
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const double eta = free_set_step(set, z, rays[k].direction, options);
    if (eta < options.eta_min) throw Error(ErrorCode::NotInInterior, "step length below safeguard");
    if (eta == kInf) continue;
    weights[k] = 1.0 / eta;
    any = true;
  }
  if (!any) throw Error(ErrorCode::NoViolation, "free set contains the whole corner polyhedron");
  auto [coeffs, constant] = nonbasic_combination(problem, rays, weights);
  // sum w_j s_j >= 1  <=>  -coeffs^T z <= constant - 1
  Cut cut;
  cut.kind = set.provenance;
  cut.player = set.player;
  cut.global = false;
  cut.rhs = constant - 1.0;
  double scale = 0.0;
  for (Entry& e : coeffs) {
    e.value = -e.value;
    scale = std::max(scale, std::fabs(e.value));
  }
  if (scale == 0.0) throw Error(ErrorCode::NoViolation, "cut has no variable coefficients");
  for (Entry& e : coeffs) e.value /= scale;
  cut.rhs /= scale;
  cut.coeffs = std::move(coeffs);
  cut.violation = cut.residual(z);
  return cut;
}

Cut best_response_cut(const ExtendedGame& eg, const LiftedLayout& layout, int i, const BestResponse& br) {
  const Game& game = eg.base();
  if (game.mode() != Mode::Nep) throw Error(ErrorCode::WrongMode, "best-response cuts need a NEP");
  const int off = game.offset(i);
  auto own = [&](int v) { return game.owner_of(v) == i; };
  auto y = [&](int v) { return br.y[v - off]; };
  const QuadraticCost& cost = game.cost(i);

  // phi_i - (k + rest(x)) <= 0  <=>  phi_i - rest(x) <= k
  Cut cut;
  cut.kind = CutKind::BrCut;
  cut.player = i;
  cut.global = true;
  double k = cost.constant;
  SparseVec coeffs{{layout.phi(i), 1.0}};
  for (const Entry& e : cost.linear) {
    if (own(e.index)) {
      k += e.value * y(e.index);
    } else {
      coeffs.push_back({e.index, -e.value});
    }
  }
  for (const QuadTerm& t : cost.quadratic) {
    if (own(t.a) && own(t.b)) {
      k += t.coeff * y(t.a) * y(t.b);
    } else if (own(t.a)) {
      coeffs.push_back({t.b, -t.coeff * y(t.a)});
    } else if (own(t.b)) {
      coeffs.push_back({t.a, -t.coeff * y(t.b)});
    } else {
      const auto w = eg.product_of(t.a, t.b);
      if (!w) throw Error(ErrorCode::UnsupportedTerm, "rival product without an aux variable");
      coeffs.push_back({layout.from_extended(*w), -t.coeff});
    }
  }
  canonicalize(coeffs);
  cut.coeffs = std::move(coeffs);
  cut.rhs = k;
  return cut;
}

std::vector<Cut> root_pihat_cuts(const ExtendedGame& eg, const LiftedLayout& layout) {
  std::vector<Cut> cuts;
  for (int i = 0; i < eg.base().num_players(); ++i) {
    const auto [k, lin] = eg.linearized_cost(i);
    Cut cut;
    cut.kind = CutKind::RootPiHat;
    cut.player = i;
    cut.global = true;
    for (const Entry& e : lin) cut.coeffs.push_back({layout.from_extended(e.index), e.value});
    cut.coeffs.push_back({layout.pihat(i), -1.0});
    canonicalize(cut.coeffs);
    cut.rhs = -k;
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

}  // namespace apxne
