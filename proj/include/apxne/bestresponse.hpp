#pragma once

#include <span>
#include <vector>

#include "apxne/lp.hpp"
#include "apxne/model.hpp"

namespace apxne {

struct MipRegion {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> integer;
  std::vector<lp::LpRow> rows;
  /// Set when a row without region variables is violated on its own.
  bool empty = false;
};

struct MipOptions {
  double integrality_tol = 1e-6;
  /// A node is pruned when its bound is not below incumbent - prune_gap.
  double prune_gap = 1e-9;
  long max_nodes = 2'000'000;
};

struct MipResult {
  std::vector<double> x;
  double value = 0.0;
  int nodes = 0;
};

/// Exact min of objective^T x over the region by depth-first branch-and-bound.
/// Branches on the most fractional variable (smallest index on ties), floor
/// child first. Integer coordinates of the result are rounded. Throws
/// Infeasible when the region holds no integer-feasible point.
MipResult mip_minimize(const std::vector<double>& objective, const MipRegion& region,
                       const MipOptions& options = {});

struct BestResponse {
  int player = 0;
  /// Minimizer for the player's block (size k_i + l_i).
  std::vector<double> y;
  /// Phi_i(x_{-i}) = pi_i(y, x_{-i}).
  double value = 0.0;
  int nodes = 0;
};

/// Player i's feasible set X_i(x_{-i}) with rivals fixed at `profile`.
MipRegion own_region(const Game& game, int i, std::span<const double> profile);

/// Objective of player i over its own block with rivals fixed (constant part dropped).
std::vector<double> own_objective(const Game& game, int i, std::span<const double> profile);

/// Best response against the rivals in `profile` (player i's own entries are ignored).
/// Throws Infeasible when X_i(x_{-i}) is empty.
BestResponse best_response(const Game& game, int i, std::span<const double> profile,
                           const MipOptions& options = {});

}  // namespace apxne
