#pragma once

// Branch-and-cut search for (alpha, beta)-approximate pure equilibria.
//
// Node problem over z = (x, lambda, phi, pihat, aux):
//   min lambda
//   s.t. g(x) <= 0 (all players' rows), linearization rows (NEP),
//        pihat_i / alpha_i - phi_i - lambda <= beta_i / alpha_i,
//        node bounds, global cuts, the node's local cuts.
// A node with optimum above the prune threshold holds no equilibrium.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apxne/bestresponse.hpp"
#include "apxne/cuts.hpp"
#include "apxne/lp.hpp"
#include "apxne/model.hpp"

namespace apxne {

struct Approximation {
  std::vector<double> alpha;
  std::vector<double> beta;

  static Approximation uniform(int players, double alpha, double beta = 0.0) {
    return {std::vector<double>(players, alpha), std::vector<double>(players, beta)};
  }
};

/// Throws InvalidApproximation unless alpha_i >= 1 and beta_i >= 0 for every player.
void check_approximation(const Game& game, const Approximation& approx);

struct Limits {
  double time_s = 3600.0;
  long nodes = -1;       // no limit when negative
  int cut_rounds = -1;   // default 10 * sum(k_i + l_i) + 100
};

struct BncOptions {
  double tol_ne = 1e-8;
  double tol_prune = 1e-5;
  double tol_int = 1e-6;
  /// LP values above this prove a node free of equilibria once its proxies are exact.
  double tol_positive = 1e-9;
  /// eps for the best-response free set; default 1 with integrality_flag, else 1e-6.
  std::optional<double> eps;
  CutOptions cut;
};

enum class NodeStatus { Open, Branched, PrunedInfeasible, PrunedPositive, CutLoopActive };
std::string to_string(NodeStatus s);

struct Node {
  int id = 0;
  int parent = -1;
  int depth = 0;
  /// Lifted bounds; the lambda entry is recomputed from alpha at assembly.
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> local_cuts;  // indices into SearchState::pool
  NodeStatus status = NodeStatus::Open;
  double lp_value = 0.0;
};

struct SearchState {
  std::vector<Node> nodes;
  std::vector<int> open;  // LIFO worklist, back is next
  std::vector<Cut> pool;  // root rows and derived cuts
  Approximation approx;
};

enum class SolveStatus { NeFound, NoNeExists, TimeLimit, NodeLimit, CutLimit };
std::string to_string(SolveStatus s);

struct CutCounts {
  long ic_phi = 0;
  long ic_pi_conv = 0;
  long ic_pi_conc = 0;
  long br = 0;

  long total() const { return ic_phi + ic_pi_conv + ic_pi_conc + br; }
  void add(CutKind kind);
};

struct SolveStats {
  long nodes = 0;
  long lp_solves = 0;
  long br_solves = 0;
  CutCounts cuts;
  double wall_time_s = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NoNeExists;
  std::vector<double> witness;
  Approximation approx;
  SolveStats stats;
  std::string diagnostic;
  std::vector<std::string> warnings;
};

struct NeCheck {
  bool is_ne = false;
  std::vector<int> violators;
  std::vector<double> pi;
  std::vector<BestResponse> br;  // br[i].value is Phi_i
};

/// pi_i(x) <= alpha_i Phi_i(x_{-i}) + beta_i + tol for every player.
NeCheck check_ne(const Game& game, std::span<const double> x, const Approximation& approx,
                 double tol = 1e-8);

struct SearchEvent {
  enum class Kind { LpSolved, CutAdded, Branched, PrunedInfeasible, PrunedPositive, NeFound, Stalled };
  Kind kind;
  int node;
  const Cut* cut = nullptr;                    // CutAdded
  std::span<const double> point = {};          // node LP optimum when available
};

using Observer = std::function<void(const SearchEvent&, const SearchState&)>;

class BncSolver {
 public:
  BncSolver(const Game& game, Approximation approx, BncOptions options = {}, Limits limits = {});

  /// Runs (or resumes) the worklist until an equilibrium, exhaustion or a limit.
  SolveResult solve();

  /// Rewrites the lambda rows for a smaller alpha. Without keep_local_cuts the
  /// local (node-scoped) cuts are dropped from the pool and every node.
  void retarget(const Approximation& approx, bool keep_local_cuts);

  const SearchState& state() const { return state_; }
  void set_state(SearchState state) { state_ = std::move(state); }
  void set_observer(Observer observer) { observer_ = std::move(observer); }
  void set_limits(const Limits& limits) { limits_ = limits; }

  const Game& game() const { return game_; }
  const LiftedLayout& layout() const { return layout_; }
  const ProxyBounds& proxy() const { return proxy_; }
  /// eps used for best-response free sets.
  double eps() const { return eps_; }

  /// Lifted point of an equilibrium candidate x: (x, 0, Phi(x), pi(x), aux(x)).
  std::vector<double> lift_tuple(std::span<const double> x, std::span<const double> phi) const;

  /// Whether z satisfies node bounds, lambda rows and the node's cuts.
  bool point_in_node(int node, std::span<const double> z, double tol = 1e-7) const;

  /// The node problem as an LP.
  lp::LpProblem node_problem(int node) const;

  /// Lambda bounds for the current alpha (zero strictly inside).
  std::pair<double, double> lambda_bounds() const;

 private:
  enum class Outcome { Pruned, Branched, NeFound, Stalled };
  Outcome process_node(int id, SolveResult& result);
  void emit(const SearchEvent& e) const {
    if (observer_) observer_(e, state_);
  }
  int branch_variable(std::span<const double> z) const;
  bool is_integer_lifted(int v) const;

  Game game_;
  std::optional<ExtendedGame> ext_;
  LiftedLayout layout_;
  ProxyBounds proxy_;
  BncOptions options_;
  Limits limits_;
  double eps_ = 1.0;
  int cut_round_limit_ = 100;
  std::vector<lp::LpRow> base_rows_;
  SearchState state_;
  Observer observer_;
  SolveStats stats_;
  std::vector<std::string> warnings_;
};

/// One-shot solve.
SolveResult solve(const Game& game, const Approximation& approx, const BncOptions& options = {},
                  const Limits& limits = {});

struct DocumentOptions {
  bool timing = true;
};

/// JSON result document with a fixed field order.
std::string solve_result_document(const SolveResult& result, const DocumentOptions& options = {});

}  // namespace apxne
