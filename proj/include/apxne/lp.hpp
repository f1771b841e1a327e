#pragma once

// Bounded-variable revised simplex for small dense LPs.
//
//   minimize  c^T x   s.t.  a_r^T x <= b_r  (r = 1..m),  l <= x <= u
//
// All variable bounds must be finite. Each row gets a slack s_r = b_r - a_r^T x
// with s_r >= 0. The optimal basis (head + explicit inverse) is kept on the
// solution so that corner_rays() can recover the corner polyhedron.

#include <cstdint>
#include <vector>

#include "apxne/sparse.hpp"

namespace apxne::lp {

struct LpRow {
  SparseVec coeffs;
  double rhs = 0.0;
};

struct LpProblem {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> objective;
  std::vector<LpRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  /// Throws ValidationError on inconsistent dimensions or non-finite bounds.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible };

enum class BasisState : std::uint8_t { Basic, AtLower, AtUpper };

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int max_iterations = 200000;
  int refactor_every = 64;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  /// b_r - a_r^T x for every row.
  std::vector<double> slack;
  double objective = 0.0;
  std::vector<BasisState> var_state;
  std::vector<BasisState> slack_state;
  /// Row duals y; reduced costs are c_j - y^T a_j. For <= rows y_r <= 0.
  std::vector<double> duals;
  /// Infeasible only: w >= 0 with min over the bound box of (w^T A) x > w^T b.
  std::vector<double> farkas;
  /// Basic column per row. Columns [0, n) structural, [n, n+m) slacks,
  /// >= n+m artificials left basic on redundant rows.
  std::vector<int> basic_head;
  /// Row-major m x m basis inverse.
  std::vector<double> basis_inverse;
  int iterations = 0;
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

struct NonbasicRef {
  enum class Kind : std::uint8_t { Structural, Slack };
  Kind kind = Kind::Structural;
  int index = 0;
  bool at_upper = false;
};

/// Extreme ray of the corner polyhedron at an optimal vertex, in the
/// structural variable space.
struct Ray {
  std::vector<double> direction;
  NonbasicRef source;
};

/// One ray per non-fixed nonbasic column (structurals with l < u, and slacks):
/// the change of the structural variables when that nonbasic moves one unit
/// away from its bound. Throws NotAVertex when the solution carries no basis.
std::vector<Ray> corner_rays(const LpProblem& problem, const LpSolution& solution);

}  // namespace apxne::lp
