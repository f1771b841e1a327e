#pragma once

// Approximate-equilibrium cuts over the lifted space
//   z = (x, lambda, phi_1..phi_n, pihat_1..pihat_n, aux).
// Best-response cuts (NEP) are globally valid. Intersection cuts (GNEP) come
// from NE-free convex sets and are valid in the subtree of the node that
// produced them.

#include <span>
#include <string>
#include <vector>

#include "apxne/bestresponse.hpp"
#include "apxne/lp.hpp"
#include "apxne/model.hpp"

namespace apxne {

struct LiftedLayout {
  int nx = 0;
  int players = 0;
  int num_aux = 0;

  LiftedLayout() = default;
  LiftedLayout(const Game& game, int num_aux);

  int lambda() const { return nx; }
  int phi(int i) const { return nx + 1 + i; }
  int pihat(int i) const { return nx + 1 + players + i; }
  int aux(int k) const { return nx + 1 + 2 * players + k; }
  int dim() const { return nx + 1 + 2 * players + num_aux; }
  /// Extended-game index (x or aux) to lifted index.
  int from_extended(int ext) const { return ext < nx ? ext : aux(ext - nx); }
};

enum class CutKind { IcPhi, IcPiConv, IcPiConc, BrCut, RootPiHat };
std::string to_string(CutKind kind);

struct Cut {
  SparseVec coeffs;  // coeffs^T z <= rhs
  double rhs = 0.0;
  CutKind kind = CutKind::BrCut;
  bool global = true;
  int node = -1;    // generating node for local cuts
  int player = -1;
  double violation = 0.0;  // at the target point, after normalization

  double residual(std::span<const double> z) const { return dot(coeffs, z) - rhs; }
};

/// constant + linear^T z + sum coeff z_a z_b.
struct QuadForm {
  double constant = 0.0;
  SparseVec linear;
  std::vector<QuadTerm> quadratic;

  double eval(std::span<const double> z) const;
  /// d/deta of eval(z + eta r) at eta = 0.
  double slope(std::span<const double> z, std::span<const double> r) const;
  /// Coefficient of eta^2 in eval(z + eta r).
  double curvature(std::span<const double> r) const;
};

enum class FreeSetKind { PolyhedralOpen, GradientHalfspace, ConcaveSublevel, ConvexEpigraph };

/// {z : part(z) < 0 for every part}; every part is convex.
struct FreeSet {
  FreeSetKind kind = FreeSetKind::PolyhedralOpen;
  CutKind provenance = CutKind::IcPhi;
  int player = -1;
  std::vector<QuadForm> parts;

  bool contains(std::span<const double> z, double margin = 0.0) const;
};

struct CutOptions {
  double min_violation = 5e-6;
  double eta_min = 1e-9;
  double eta_max = 1e12;
  double interior_tol = 1e-9;
  double dispatch_tol = 1e-9;
  bool bisection_only = false;
};

struct CutTargets {
  std::vector<int> phi;    // phi_i above the best-response value
  std::vector<int> pihat;  // pihat_i below the cost
};

/// Throws DichotomyViolation when both sets are empty.
CutTargets dispatch_cut_targets(const Game& game, const LiftedLayout& layout, std::span<const double> z,
                                const std::vector<BestResponse>& br, const CutOptions& options = {});

/// {pi_i(y*, x_{-i}) < phi_i} intersected with {g_i(y*, x_{-i}) < eps}.
FreeSet build_free_set_phi(const Game& game, const LiftedLayout& layout, int i, std::span<const double> z,
                           const BestResponse& br, double eps, const CutOptions& options = {});

/// {pihat_i < pi_i(x*) + grad pi_i(x*)^T (x - x*)}; ConvexInAll costs only.
FreeSet build_free_set_pi_conv(const Game& game, const LiftedLayout& layout, int i,
                               std::span<const double> z, const CutOptions& options = {});

/// {pihat_i < pi_i(x)}; ConcaveAllLinearInRivals costs only.
FreeSet build_free_set_pi_conc(const Game& game, const LiftedLayout& layout, int i,
                               std::span<const double> z, const CutOptions& options = {});

/// sup{eta >= 0 : part(z + eta r) < 0} by the closed-form quadratic root;
/// infinity when the ray never leaves.
double step_length(const QuadForm& part, std::span<const double> z, std::span<const double> r);

/// Same quantity by bracketing and bisection on evaluations along the ray.
/// Returns the last point known to be inside.
double step_length_bisection(const QuadForm& part, std::span<const double> z, std::span<const double> r,
                             double eta_max = 1e12);

double free_set_step(const FreeSet& set, std::span<const double> z, std::span<const double> r,
                     const CutOptions& options = {});

/// Intersection cut sum_j s_j / eta_j >= 1 in the nonbasic space of the LP
/// vertex, written over the structural variables. Throws NotInInterior and
/// NoViolation (every step infinite).
Cut intersection_cut(const lp::LpProblem& problem, const lp::LpSolution& solution,
                     const std::vector<lp::Ray>& rays, const FreeSet& set, const CutOptions& options = {});

/// Expresses sum_j w_j s_j (s_j the nonbasic distances) as coeffs^T z + constant.
std::pair<SparseVec, double> nonbasic_combination(const lp::LpProblem& problem, const std::vector<lp::Ray>& rays,
                                                  const std::vector<double>& weights);

/// phi_i - pi_i(y*, x_{-i}) <= 0 with products mapped to their aux variables.
Cut best_response_cut(const ExtendedGame& eg, const LiftedLayout& layout, int i, const BestResponse& br);

/// pihat_i >= linearized pi_i for every player.
std::vector<Cut> root_pihat_cuts(const ExtendedGame& eg, const LiftedLayout& layout);

}  // namespace apxne
