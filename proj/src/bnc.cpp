#include "apxne/bnc.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "apxne/error.hpp"

namespace apxne {

void check_approximation(const Game& game, const Approximation& approx) {
  const auto n = static_cast<std::size_t>(game.num_players());
  if (approx.alpha.size() != n || approx.beta.size() != n) {
    throw Error(ErrorCode::InvalidApproximation, "need one alpha and one beta per player");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(approx.alpha[i] >= 1.0) || !std::isfinite(approx.alpha[i])) {
      throw Error(ErrorCode::InvalidApproximation, "alpha must be finite and >= 1");
    }
    if (!(approx.beta[i] >= 0.0) || !std::isfinite(approx.beta[i])) {
      throw Error(ErrorCode::InvalidApproximation, "beta must be finite and >= 0");
    }
  }
}

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Open: return "Open";
    case NodeStatus::Branched: return "Branched";
    case NodeStatus::PrunedInfeasible: return "PrunedInfeasible";
    case NodeStatus::PrunedPositive: return "PrunedPositive";
    case NodeStatus::CutLoopActive: return "CutLoopActive";
  }
  return "Open";
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::NeFound: return "NeFound";
    case SolveStatus::NoNeExists: return "NoNeExists";
    case SolveStatus::TimeLimit: return "TimeLimit";
    case SolveStatus::NodeLimit: return "NodeLimit";
    case SolveStatus::CutLimit: return "CutLimit";
  }
  return "NoNeExists";
}

void CutCounts::add(CutKind kind) {
  switch (kind) {
    case CutKind::IcPhi: ++ic_phi; break;
    case CutKind::IcPiConv: ++ic_pi_conv; break;
    case CutKind::IcPiConc: ++ic_pi_conc; break;
    case CutKind::BrCut: ++br; break;
    case CutKind::RootPiHat: break;
  }
}

NeCheck check_ne(const Game& game, std::span<const double> x, const Approximation& approx, double tol) {
  NeCheck out;
  out.is_ne = true;
  for (int i = 0; i < game.num_players(); ++i) {
    out.br.push_back(best_response(game, i, x));
    out.pi.push_back(eval_cost(game, i, x));
    if (out.pi[i] > approx.alpha[i] * out.br[i].value + approx.beta[i] + tol) {
      out.violators.push_back(i);
      out.is_ne = false;
    }
  }
  return out;
}

BncSolver::BncSolver(const Game& game, Approximation approx, BncOptions options, Limits limits)
    : game_(game), options_(options), limits_(limits) {
  check_approximation(game_, approx);
  if (game_.mode() == Mode::Nep) ext_ = linearize_bilinear(game_);
  layout_ = LiftedLayout(game_, ext_ ? ext_->num_aux() : 0);
  proxy_ = compute_proxy_bounds(game_);
  if (options_.eps) {
    eps_ = *options_.eps;
  } else if (game_.integrality_flag()) {
    eps_ = 1.0;
  } else {
    eps_ = 1e-6;
    if (game_.mode() == Mode::Gnep) {
      warnings_.push_back("integrality_flag not set: best-response free sets use eps = 1e-6 and their "
                          "validity is heuristic");
    }
  }
  cut_round_limit_ = limits_.cut_rounds > 0 ? limits_.cut_rounds : 10 * game_.num_vars() + 100;

  for (const LinearRow& row : game_.constraints()) base_rows_.push_back({row.coeffs, row.rhs});
  if (ext_) {
    for (const LinearRow& row : ext_->rows()) {
      lp::LpRow r{{}, row.rhs};
      for (const Entry& e : row.coeffs) r.coeffs.push_back({layout_.from_extended(e.index), e.value});
      canonicalize(r.coeffs);
      base_rows_.push_back(std::move(r));
    }
  }

  Node root;
  root.lower.assign(layout_.dim(), 0.0);
  root.upper.assign(layout_.dim(), 0.0);
  for (int v = 0; v < layout_.nx; ++v) {
    root.lower[v] = game_.lower(v);
    root.upper[v] = game_.upper(v);
  }
  for (int i = 0; i < game_.num_players(); ++i) {
    for (int v : {layout_.phi(i), layout_.pihat(i)}) {
      root.lower[v] = proxy_.pihat_minus[i];
      root.upper[v] = proxy_.phi_plus[i];
    }
  }
  for (int k = 0; k < layout_.num_aux; ++k) {
    root.lower[layout_.aux(k)] = ext_->aux()[k].lower;
    root.upper[layout_.aux(k)] = ext_->aux()[k].upper;
  }
  state_.nodes.push_back(std::move(root));
  state_.open.push_back(0);
  state_.approx = std::move(approx);
  if (ext_) state_.pool = root_pihat_cuts(*ext_, layout_);
}

std::pair<double, double> BncSolver::lambda_bounds() const {
  // lambda >= pihat_i / alpha_i - phi_i - beta_i / alpha_i; only its minimum matters.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < game_.num_players(); ++i) {
    const double a = state_.approx.alpha[i];
    const double b = state_.approx.beta[i] / a;
    lo = std::max(lo, proxy_.pihat_minus[i] / a - proxy_.phi_plus[i] - b);
    hi = std::max(hi, proxy_.phi_plus[i] / a - proxy_.pihat_minus[i] - b);
  }
  return {std::min(lo, 0.0) - 1.0, hi + 1.0};
}

lp::LpProblem BncSolver::node_problem(int id) const {
  const Node& node = state_.nodes[id];
  lp::LpProblem p;
  p.lower = node.lower;
  p.upper = node.upper;
  const auto [lam_lo, lam_hi] = lambda_bounds();
  p.lower[layout_.lambda()] = lam_lo;
  p.upper[layout_.lambda()] = lam_hi;
  p.objective.assign(layout_.dim(), 0.0);
  p.objective[layout_.lambda()] = 1.0;
  p.rows = base_rows_;
  for (int i = 0; i < game_.num_players(); ++i) {
    // pihat_i / alpha_i - phi_i - lambda <= beta_i / alpha_i
    const double a = state_.approx.alpha[i];
    p.rows.push_back({{{layout_.lambda(), -1.0}, {layout_.phi(i), -1.0}, {layout_.pihat(i), 1.0 / a}},
                      state_.approx.beta[i] / a});
  }
  for (const Cut& c : state_.pool) {
    if (c.global) p.rows.push_back({c.coeffs, c.rhs});
  }
  for (int k : node.local_cuts) p.rows.push_back({state_.pool[k].coeffs, state_.pool[k].rhs});
  return p;
}

bool BncSolver::is_integer_lifted(int v) const {
  if (v < layout_.nx) return game_.is_integer(v);
  if (v >= layout_.aux(0) && ext_) return ext_->aux()[v - layout_.aux(0)].integer;
  return false;
}

int BncSolver::branch_variable(std::span<const double> z) const {
  int best = -1;
  double most = options_.tol_int;
  for (int v = 0; v < layout_.dim(); ++v) {
    if (!is_integer_lifted(v)) continue;
    const double f = z[v] - std::floor(z[v]);
    const double frac = std::min(f, 1.0 - f);
    if (frac > most) {
      most = frac;
      best = v;
    }
  }
  return best;
}

std::vector<double> BncSolver::lift_tuple(std::span<const double> x, std::span<const double> phi) const {
  std::vector<double> z(layout_.dim(), 0.0);
  std::copy(x.begin(), x.end(), z.begin());
  for (int i = 0; i < game_.num_players(); ++i) {
    z[layout_.phi(i)] = phi[i];
    z[layout_.pihat(i)] = eval_cost(game_, i, x);
  }
  if (ext_) {
    const auto ext = ext_->lift(x);
    for (int k = 0; k < layout_.num_aux; ++k) z[layout_.aux(k)] = ext[layout_.nx + k];
  }
  return z;
}

bool BncSolver::point_in_node(int id, std::span<const double> z, double tol) const {
  const lp::LpProblem p = node_problem(id);
  for (int v = 0; v < layout_.dim(); ++v) {
    if (z[v] < p.lower[v] - tol || z[v] > p.upper[v] + tol) return false;
  }
  for (const lp::LpRow& row : p.rows) {
    if (dot(row.coeffs, z) > row.rhs + tol) return false;
  }
  return true;
}

BncSolver::Outcome BncSolver::process_node(int id, SolveResult& result) {
  state_.nodes[id].status = NodeStatus::CutLoopActive;
  for (int round = 0;; ++round) {
    const lp::LpProblem problem = node_problem(id);
    lp::LpSolution sol;
    try {
      sol = lp::solve_lp(problem);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalFailure) throw;
      result.diagnostic = std::string(e.what()) + " (node " + std::to_string(id) + ")";
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::Stalled, id});
      return Outcome::Stalled;
    }
    ++stats_.lp_solves;
    if (sol.status == lp::LpStatus::Infeasible) {
      state_.nodes[id].status = NodeStatus::PrunedInfeasible;
      emit({SearchEvent::Kind::PrunedInfeasible, id});
      return Outcome::Pruned;
    }
    state_.nodes[id].lp_value = sol.objective;
    emit({SearchEvent::Kind::LpSolved, id, nullptr, sol.x});
    if (sol.objective > options_.tol_prune) {
      state_.nodes[id].status = NodeStatus::PrunedPositive;
      emit({SearchEvent::Kind::PrunedPositive, id, nullptr, sol.x});
      return Outcome::Pruned;
    }

    const int j = branch_variable(sol.x);
    if (j >= 0) {
      Node down = state_.nodes[id];
      Node up = state_.nodes[id];
      down.upper[j] = std::floor(sol.x[j]);
      up.lower[j] = std::ceil(sol.x[j]);
      for (Node* child : {&up, &down}) {
        child->id = static_cast<int>(state_.nodes.size());
        child->parent = id;
        child->depth = state_.nodes[id].depth + 1;
        child->status = NodeStatus::Open;
        child->lp_value = sol.objective;
        state_.open.push_back(child->id);
        state_.nodes.push_back(std::move(*child));
      }
      state_.nodes[id].status = NodeStatus::Branched;
      emit({SearchEvent::Kind::Branched, id, nullptr, sol.x});
      return Outcome::Branched;
    }

    std::vector<double> x(sol.x.begin(), sol.x.begin() + layout_.nx);
    for (int v = 0; v < layout_.nx; ++v) {
      if (game_.is_integer(v)) x[v] = std::round(x[v]);
    }
    NeCheck ne;
    try {
      ne = check_ne(game_, x, state_.approx, options_.tol_ne);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      result.diagnostic = std::string("best response failed at an integer node point: ") + e.what();
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::Stalled, id, nullptr, sol.x});
      return Outcome::Stalled;
    }
    stats_.br_solves += game_.num_players();
    if (ne.is_ne) {
      result.witness = x;
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::NeFound, id, nullptr, sol.x});
      return Outcome::NeFound;
    }
    if (round >= cut_round_limit_) {
      result.diagnostic = "cut loop at node " + std::to_string(id) + " exceeded " +
                          std::to_string(cut_round_limit_) + " rounds";
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::Stalled, id, nullptr, sol.x});
      return Outcome::Stalled;
    }

    CutTargets targets;
    try {
      targets = dispatch_cut_targets(game_, layout_, sol.x, ne.br, options_.cut);
    } catch (const Error& e) {
      // Exact proxies at a non-equilibrium point: lambda* is the true (positive)
      // gap, and every equilibrium tuple has lambda <= 0.
      if (e.code() == ErrorCode::DichotomyViolation && sol.objective > options_.tol_positive) {
        state_.nodes[id].status = NodeStatus::PrunedPositive;
        emit({SearchEvent::Kind::PrunedPositive, id, nullptr, sol.x});
        return Outcome::Pruned;
      }
      result.diagnostic = std::string(e.what()) + " (node " + std::to_string(id) + ")";
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::Stalled, id, nullptr, sol.x});
      return Outcome::Stalled;
    }

    int added = 0;
    std::string skipped;
    auto accept = [&](Cut cut) {
      if (cut.violation < options_.cut.min_violation) return;
      const int k = static_cast<int>(state_.pool.size());
      if (!cut.global) {
        cut.node = id;
        state_.nodes[id].local_cuts.push_back(k);
      }
      stats_.cuts.add(cut.kind);
      state_.pool.push_back(std::move(cut));
      ++added;
      emit({SearchEvent::Kind::CutAdded, id, &state_.pool.back(), sol.x});
    };

    if (game_.mode() == Mode::Nep) {
      for (int i : targets.phi) {
        Cut cut = best_response_cut(*ext_, layout_, i, ne.br[i]);
        double scale = 0.0;
        for (const Entry& e : cut.coeffs) scale = std::max(scale, std::fabs(e.value));
        for (Entry& e : cut.coeffs) e.value /= scale;
        cut.rhs /= scale;
        cut.violation = cut.residual(sol.x);
        accept(std::move(cut));
      }
      if (added == 0 && !targets.pihat.empty()) skipped = "cost proxies below cost in a NEP node";
    } else {
      const std::vector<lp::Ray> rays = lp::corner_rays(problem, sol);
      auto try_set = [&](auto&& build) {
        try {
          const FreeSet set = build();
          accept(intersection_cut(problem, sol, rays, set, options_.cut));
        } catch (const Error& e) {
          skipped = e.what();
        }
      };
      for (int i : targets.phi) {
        try_set([&] { return build_free_set_phi(game_, layout_, i, sol.x, ne.br[i], eps_, options_.cut); });
      }
      for (int i : targets.pihat) {
        const QuadraticCost& cost = game_.cost(i);
        if (cost.is_linear() || cost.structure == CostStructure::ConvexInAll) {
          try_set([&] { return build_free_set_pi_conv(game_, layout_, i, sol.x, options_.cut); });
        } else if (cost.structure == CostStructure::ConcaveAllLinearInRivals) {
          try_set([&] { return build_free_set_pi_conc(game_, layout_, i, sol.x, options_.cut); });
        } else {
          skipped = "AssumptionViolated: no convex free set for the cost of player " + std::to_string(i);
        }
      }
    }
    if (added == 0) {
      result.diagnostic = "no violated cut at node " + std::to_string(id) +
                          (skipped.empty() ? std::string() : ": " + skipped);
      state_.nodes[id].status = NodeStatus::Open;
      emit({SearchEvent::Kind::Stalled, id, nullptr, sol.x});
      return Outcome::Stalled;
    }
  }
}

SolveResult BncSolver::solve() {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  stats_ = {};
  SolveResult result;
  result.status = SolveStatus::NoNeExists;
  while (!state_.open.empty()) {
    if (elapsed() > limits_.time_s) {
      result.status = SolveStatus::TimeLimit;
      break;
    }
    if (limits_.nodes >= 0 && stats_.nodes >= limits_.nodes) {
      result.status = SolveStatus::NodeLimit;
      break;
    }
    const int id = state_.open.back();
    state_.open.pop_back();
    ++stats_.nodes;
    const Outcome out = process_node(id, result);
    if (out == Outcome::NeFound || out == Outcome::Stalled) {
      state_.open.push_back(id);
      result.status = out == Outcome::NeFound ? SolveStatus::NeFound : SolveStatus::CutLimit;
      break;
    }
  }
  stats_.wall_time_s = elapsed();
  result.approx = state_.approx;
  result.stats = stats_;
  result.warnings = warnings_;
  return result;
}

void BncSolver::retarget(const Approximation& approx, bool keep_local_cuts) {
  check_approximation(game_, approx);
  bool smaller = false;
  for (int i = 0; i < game_.num_players(); ++i) {
    if (approx.alpha[i] > state_.approx.alpha[i] || approx.beta[i] > state_.approx.beta[i]) {
      throw Error(ErrorCode::NotADecrease, "retarget must not increase alpha or beta");
    }
    smaller = smaller || approx.alpha[i] < state_.approx.alpha[i] || approx.beta[i] < state_.approx.beta[i];
  }
  if (!smaller) throw Error(ErrorCode::NotADecrease, "retarget must decrease alpha");
  state_.approx = approx;
  if (keep_local_cuts) return;
  std::vector<Cut> kept;
  for (Cut& c : state_.pool) {
    if (c.global) kept.push_back(std::move(c));
  }
  state_.pool = std::move(kept);
  for (Node& node : state_.nodes) node.local_cuts.clear();
}

SolveResult solve(const Game& game, const Approximation& approx, const BncOptions& options, const Limits& limits) {
  BncSolver solver(game, approx, options, limits);
  return solver.solve();
}

std::string solve_result_document(const SolveResult& result, const DocumentOptions& options) {
  using Json = nlohmann::ordered_json;
  Json doc;
  doc["status"] = to_string(result.status);
  doc["witness"] = result.status == SolveStatus::NeFound ? Json(result.witness) : Json(nullptr);
  doc["alpha"] = result.approx.alpha;
  doc["beta"] = result.approx.beta;
  const SolveStats& s = result.stats;
  doc["stats"] = {{"nodes", s.nodes},
                  {"lp_solves", s.lp_solves},
                  {"br_solves", s.br_solves},
                  {"cuts",
                   {{"ic_phi", s.cuts.ic_phi},
                    {"ic_pi_conv", s.cuts.ic_pi_conv},
                    {"ic_pi_conc", s.cuts.ic_pi_conc},
                    {"br", s.cuts.br}}}};
  doc["wall_time_s"] = options.timing ? Json(s.wall_time_s) : Json(nullptr);
  doc["diagnostic"] = result.diagnostic;
  doc["warnings"] = result.warnings;
  return doc.dump(2) + "\n";
}

}  // namespace apxne
