#pragma once

// Game data model.
//
// Variables use one global order: player 0's integers, player 0's continuous,
// player 1's integers, ... Every module indexes against that order.
// Constraint rows read  sum_j coeffs_j x_j <= rhs  (the rows of g_owner).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apxne/sparse.hpp"

namespace apxne {

enum class Mode { Nep, Gnep };

enum class CostStructure { ConvexInAll, ConcaveAllLinearInRivals, BilinearOwnRival };

std::string to_string(Mode mode);
std::string to_string(CostStructure s);
Mode parse_mode(const std::string& text);
CostStructure parse_structure(const std::string& text);

struct QuadTerm {
  int a;
  int b;
  double coeff;

  friend bool operator==(const QuadTerm&, const QuadTerm&) = default;
};

struct QuadraticCost {
  double constant = 0.0;
  SparseVec linear;
  std::vector<QuadTerm> quadratic;
  CostStructure structure = CostStructure::ConvexInAll;

  double eval(std::span<const double> x) const;
  /// Gradient with respect to every variable, dense of size x.size().
  std::vector<double> gradient(std::span<const double> x) const;
  bool is_linear() const { return quadratic.empty(); }

  friend bool operator==(const QuadraticCost&, const QuadraticCost&) = default;
};

struct PlayerBlock {
  int num_int = 0;
  int num_cont = 0;
  std::vector<double> lower;
  std::vector<double> upper;

  int size() const { return num_int + num_cont; }

  friend bool operator==(const PlayerBlock&, const PlayerBlock&) = default;
};

struct LinearRow {
  int owner = 0;
  SparseVec coeffs;
  double rhs = 0.0;

  friend bool operator==(const LinearRow&, const LinearRow&) = default;
};

/// Immutable game description. Construction computes the variable layout but
/// does not validate; use validate_game() (load_instance does).
class Game {
 public:
  Game() = default;
  Game(Mode mode, std::vector<PlayerBlock> players, std::vector<LinearRow> constraints,
       std::vector<QuadraticCost> costs, bool integrality_flag);

  Mode mode() const { return mode_; }
  bool integrality_flag() const { return integrality_flag_; }
  int num_players() const { return static_cast<int>(players_.size()); }
  int num_vars() const { return num_vars_; }

  const std::vector<PlayerBlock>& players() const { return players_; }
  const PlayerBlock& player(int i) const { return players_[i]; }
  const std::vector<LinearRow>& constraints() const { return constraints_; }
  const std::vector<QuadraticCost>& costs() const { return costs_; }
  const QuadraticCost& cost(int i) const { return costs_[i]; }

  /// First global index of player i's block.
  int offset(int i) const { return offsets_[i]; }
  int owner_of(int var) const { return owner_[var]; }
  bool is_integer(int var) const { return integer_[var]; }
  double lower(int var) const { return lower_[var]; }
  double upper(int var) const { return upper_[var]; }
  const std::vector<double>& lower_bounds() const { return lower_; }
  const std::vector<double>& upper_bounds() const { return upper_; }

  /// Indices of rows owned by player i.
  std::vector<int> rows_of(int i) const;

  friend bool operator==(const Game& a, const Game& b) {
    return a.mode_ == b.mode_ && a.players_ == b.players_ && a.constraints_ == b.constraints_ &&
           a.costs_ == b.costs_ && a.integrality_flag_ == b.integrality_flag_;
  }

 private:
  Mode mode_ = Mode::Nep;
  std::vector<PlayerBlock> players_;
  std::vector<LinearRow> constraints_;
  std::vector<QuadraticCost> costs_;
  bool integrality_flag_ = false;

  int num_vars_ = 0;
  std::vector<int> offsets_;
  std::vector<int> owner_;
  std::vector<bool> integer_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct ValidationOptions {
  /// Reject quadratic terms pairing two variables of the cost owner. Best
  /// responses are computed by branch-and-bound over LPs and are only exact
  /// for objectives that are linear in the own strategy.
  bool reject_own_quadratic = true;
  double eigen_tol = 1e-9;
};

/// Throws ValidationError when any model invariant fails.
void validate_game(const Game& game, const ValidationOptions& options = {});

/// pi_i(x).
double eval_cost(const Game& game, int i, std::span<const double> x);

/// pi_i(y_i, x_{-i}): x with player i's block replaced by `own`.
double eval_cost_with(const Game& game, int i, std::span<const double> own,
                      std::span<const double> x);

/// g(x): residual a_r^T x - rhs_r for every row (feasible when <= tolerance).
std::vector<double> eval_constraints(const Game& game, std::span<const double> x);

/// Largest residual, 0 when every row holds exactly.
double max_violation(const Game& game, std::span<const double> x);

struct ProxyBounds {
  std::vector<double> phi_plus;
  std::vector<double> pihat_minus;
};

/// Sound bounds sup/inf of pi_i over the variable box. Variables joined by
/// quadratic terms form components; a component without squared terms and at
/// most 16 variables is multilinear, so its extremes are found exactly at box
/// corners. Larger components fall back to termwise interval arithmetic.
ProxyBounds compute_proxy_bounds(const Game& game);

/// [inf, sup] of one quadratic cost over a box (the engine of compute_proxy_bounds).
std::pair<double, double> cost_range(const QuadraticCost& cost, std::span<const double> lower,
                                     std::span<const double> upper);

enum class AuxKind { Bit, BitProduct, Product };

struct AuxVar {
  AuxKind kind;
  double lower;
  double upper;
  bool integer;
};

/// Auxiliary product w = x_a * x_b. `expanded` is the integer factor whose
/// binary expansion carries the McCormick rows.
struct ProductLink {
  int expanded;
  int other;
  int aux;  // extended index of w
};

/// Game plus auxiliary variables making integer x continuous products linear.
/// Extended index space: [0, nx) the game variables, [nx, nx + num_aux) aux.
class ExtendedGame {
 public:
  const Game& base() const { return base_; }
  int num_base_vars() const { return base_.num_vars(); }
  int num_aux() const { return static_cast<int>(aux_.size()); }
  int num_vars() const { return num_base_vars() + num_aux(); }
  const std::vector<AuxVar>& aux() const { return aux_; }
  const std::vector<LinearRow>& rows() const { return rows_; }
  const std::vector<ProductLink>& products() const { return products_; }

  bool is_integer(int ext) const;
  double lower(int ext) const;
  double upper(int ext) const;

  /// Extended index of w for the product x_a x_b, if one exists.
  std::optional<int> product_of(int a, int b) const;

  /// Aux values for a profile whose integer variables are integral. The
  /// returned vector covers the extended space (x followed by aux).
  std::vector<double> lift(std::span<const double> x) const;

  /// Cost i as an affine function of the extended variables (products -> w).
  /// Returns (constant, linear).
  std::pair<double, SparseVec> linearized_cost(int i) const;

 private:
  friend ExtendedGame linearize_bilinear(const Game& game);

  struct Expansion {
    int var;
    double offset;
    std::vector<int> bits;  // extended indices; {var} itself when binary
  };

  Game base_;
  std::vector<AuxVar> aux_;
  std::vector<LinearRow> rows_;
  std::vector<ProductLink> products_;
  std::vector<Expansion> expansions_;
  // For every product, the per-bit v variables (same order as the expansion bits).
  std::vector<std::vector<int>> product_bits_;
};

/// Replaces every quadratic term with an auxiliary w via binary expansion of
/// an integer factor and exact per-bit McCormick rows. Throws UnsupportedTerm
/// for continuous x continuous terms.
ExtendedGame linearize_bilinear(const Game& game);

}  // namespace apxne
