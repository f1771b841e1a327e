#pragma once

// Binary search for the smallest uniform alpha admitting an (alpha, 0)-equilibrium.
//
// Phase one grows alpha0, F alpha0, F^2 alpha0, ... until a probe finds an
// equilibrium (alpha+). Phase two bisects [1, alpha+] down to the tolerance and
// finishes with a probe at alpha = 1 when the interval touches it.
//
// MultiTree builds a fresh tree per probe. The single-tree variants keep the
// search state of the last probe that found an equilibrium and continue it at
// the next smaller alpha; ReuseTree drops node-scoped cuts, ReuseTreeCuts keeps them.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apxne/bnc.hpp"

namespace apxne {

enum class AlphaVariant { MultiTree, ReuseTree, ReuseTreeCuts };
std::string to_string(AlphaVariant v);
/// "multitree", "reuse-tree", "reuse-cuts". Throws ParseError.
AlphaVariant parse_variant(const std::string& text);

enum class AlphaStatus { Converged, AlphaUnbounded, LimitHit };
std::string to_string(AlphaStatus s);

struct ProbeRecord {
  int iteration = 0;
  double alpha = 0.0;
  SolveStatus status = SolveStatus::NoNeExists;
  long nodes = 0;
  long cuts = 0;
  double elapsed_s = 0.0;  // since the search started
};

struct AlphaHooks {
  /// Solver about to run a probe (already retargeted in the single-tree variants).
  std::function<void(const BncSolver&, double alpha)> before_probe;
  std::function<void(const ProbeRecord&, const BncSolver&)> after_probe;
};

struct AlphaSearchOptions {
  double alpha0 = 10.0;
  double factor = 10.0;
  int max_growth = 20;
  double tol = 0.1;
  BncOptions bnc;
  /// time_s bounds the whole search; nodes and cut_rounds apply per probe.
  Limits limits;
  AlphaHooks hooks;
};

struct AlphaSearchResult {
  AlphaStatus status = AlphaStatus::LimitHit;
  AlphaVariant variant = AlphaVariant::MultiTree;
  double alpha_lo = 1.0;
  /// nullopt while no probe has found an equilibrium.
  std::optional<double> alpha_hi;
  std::vector<double> witness;
  std::vector<ProbeRecord> trace;
  long total_nodes = 0;
  long total_cuts = 0;
  /// Some witness had a negative best-response value, so alpha-monotonicity
  /// (and with it the bisection) is not guaranteed.
  bool heuristic = false;
  std::vector<std::string> warnings;
  std::string diagnostic;
  double wall_time_s = 0.0;
};

/// Phase one only. nullopt means AlphaUnbounded (or a limit; see the trace).
std::optional<double> find_alpha_upper(const Game& game, const AlphaSearchOptions& options = {});

AlphaSearchResult best_alpha(const Game& game, AlphaVariant variant, const AlphaSearchOptions& options = {});

/// iteration,alpha,status,nodes,cuts,time_s (time column empty without timing).
std::string alpha_trace_csv(const AlphaSearchResult& result, bool timing = true);

std::string alpha_result_document(const AlphaSearchResult& result, const DocumentOptions& options = {});

}  // namespace apxne
