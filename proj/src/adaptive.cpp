#include "apxne/adaptive.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>

#include "apxne/error.hpp"

namespace apxne {

std::string to_string(AlphaVariant v) {
  switch (v) {
    case AlphaVariant::MultiTree: return "multitree";
    case AlphaVariant::ReuseTree: return "reuse-tree";
    case AlphaVariant::ReuseTreeCuts: return "reuse-cuts";
  }
  return "multitree";
}

AlphaVariant parse_variant(const std::string& text) {
  for (AlphaVariant v : {AlphaVariant::MultiTree, AlphaVariant::ReuseTree, AlphaVariant::ReuseTreeCuts}) {
    if (text == to_string(v)) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown variant '" + text + "'");
}

std::string to_string(AlphaStatus s) {
  switch (s) {
    case AlphaStatus::Converged: return "Converged";
    case AlphaStatus::AlphaUnbounded: return "AlphaUnbounded";
    case AlphaStatus::LimitHit: return "LimitHit";
  }
  return "LimitHit";
}

namespace {

using Clock = std::chrono::steady_clock;

class Search {
 public:
  Search(const Game& game, AlphaVariant variant, const AlphaSearchOptions& options)
      : game_(game), variant_(variant), options_(options), start_(Clock::now()) {
    result_.variant = variant;
  }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  // Runs one probe; on NeFound records the witness and (single-tree) the state.
  SolveStatus probe(double alpha, bool fresh) {
    Limits limits = options_.limits;
    limits.time_s = std::max(0.0, options_.limits.time_s - elapsed());
    const Approximation approx = Approximation::uniform(game_.num_players(), alpha);
    std::optional<BncSolver> solver;
    if (fresh || !snapshot_ || variant_ == AlphaVariant::MultiTree) {
      solver.emplace(game_, approx, options_.bnc, limits);
    } else {
      solver.emplace(game_, snapshot_->approx, options_.bnc, limits);
      solver->set_state(*snapshot_);
      solver->retarget(approx, variant_ == AlphaVariant::ReuseTreeCuts);
    }
    if (options_.hooks.before_probe) options_.hooks.before_probe(*solver, alpha);
    const SolveResult r = solver->solve();

    ProbeRecord rec;
    rec.iteration = static_cast<int>(result_.trace.size());
    rec.alpha = alpha;
    rec.status = r.status;
    rec.nodes = r.stats.nodes;
    rec.cuts = r.stats.cuts.total();
    rec.elapsed_s = elapsed();
    result_.trace.push_back(rec);
    result_.total_nodes += rec.nodes;
    result_.total_cuts += rec.cuts;
    for (const std::string& w : r.warnings) add_warning(w);
    if (options_.hooks.after_probe) options_.hooks.after_probe(rec, *solver);

    if (r.status == SolveStatus::NeFound) {
      result_.witness = r.witness;
      result_.alpha_hi = alpha;
      const NeCheck check = check_ne(game_, r.witness, approx, options_.bnc.tol_ne);
      for (const BestResponse& br : check.br) {
        if (br.value < 0.0 && !result_.heuristic) {
          result_.heuristic = true;
          add_warning("negative best-response value at a witness: larger alpha is not guaranteed to be "
                      "weaker, so the bisection is heuristic for this instance");
        }
      }
      if (variant_ != AlphaVariant::MultiTree) snapshot_ = solver->state();
    } else if (r.status != SolveStatus::NoNeExists) {
      result_.diagnostic = "probe at alpha " + fmt::format("{}", alpha) + " stopped with " + to_string(r.status) +
                           (r.diagnostic.empty() ? std::string() : ": " + r.diagnostic);
    }
    return r.status;
  }

  std::optional<double> grow() {
    double alpha = options_.alpha0;
    for (int g = 0; g <= options_.max_growth; ++g) {
      const SolveStatus s = probe(alpha, true);
      if (s == SolveStatus::NeFound) return alpha;
      if (s != SolveStatus::NoNeExists) {
        result_.status = AlphaStatus::LimitHit;
        return std::nullopt;
      }
      result_.alpha_lo = alpha;
      alpha *= options_.factor;
    }
    result_.status = AlphaStatus::AlphaUnbounded;
    return std::nullopt;
  }

  AlphaSearchResult run() {
    if (!(options_.alpha0 >= 1.0) || !(options_.factor > 1.0) || !(options_.tol > 0.0)) {
      throw Error(ErrorCode::InvalidApproximation, "need alpha0 >= 1, factor > 1 and tol > 0");
    }
    if (grow()) {
      result_.status = AlphaStatus::Converged;
      bisect();
    }
    result_.wall_time_s = elapsed();
    return std::move(result_);
  }

  void bisect() {
    while (*result_.alpha_hi - result_.alpha_lo > options_.tol) {
      const double mid = 0.5 * (result_.alpha_lo + *result_.alpha_hi);
      const SolveStatus s = probe(mid, false);
      if (s == SolveStatus::NeFound) continue;
      if (s != SolveStatus::NoNeExists) {
        result_.status = AlphaStatus::LimitHit;
        return;
      }
      result_.alpha_lo = mid;
    }
    if (result_.alpha_lo == 1.0 && *result_.alpha_hi > 1.0) {
      const SolveStatus s = probe(1.0, false);
      if (s != SolveStatus::NeFound && s != SolveStatus::NoNeExists) result_.status = AlphaStatus::LimitHit;
    }
  }

  void add_warning(const std::string& w) {
    if (std::find(result_.warnings.begin(), result_.warnings.end(), w) == result_.warnings.end()) {
      result_.warnings.push_back(w);
    }
  }

 private:
  const Game& game_;
  AlphaVariant variant_;
  const AlphaSearchOptions& options_;
  Clock::time_point start_;
  AlphaSearchResult result_;
  std::optional<SearchState> snapshot_;
};

}  // namespace

std::optional<double> find_alpha_upper(const Game& game, const AlphaSearchOptions& options) {
  Search search(game, AlphaVariant::MultiTree, options);
  return search.grow();
}

AlphaSearchResult best_alpha(const Game& game, AlphaVariant variant, const AlphaSearchOptions& options) {
  return Search(game, variant, options).run();
}

std::string alpha_trace_csv(const AlphaSearchResult& result, bool timing) {
  std::string out = "iteration,alpha,status,nodes,cuts,time_s\n";
  for (const ProbeRecord& p : result.trace) {
    out += fmt::format("{},{},{},{},{},{}\n", p.iteration, p.alpha, to_string(p.status), p.nodes, p.cuts,
                       timing ? fmt::format("{}", p.elapsed_s) : std::string());
  }
  return out;
}

std::string alpha_result_document(const AlphaSearchResult& result, const DocumentOptions& options) {
  using Json = nlohmann::ordered_json;
  Json doc;
  doc["status"] = to_string(result.status);
  doc["variant"] = to_string(result.variant);
  doc["alpha_lo"] = result.alpha_lo;
  doc["alpha_hi"] = result.alpha_hi ? Json(*result.alpha_hi) : Json(nullptr);
  doc["witness"] = result.alpha_hi ? Json(result.witness) : Json(nullptr);
  doc["heuristic"] = result.heuristic;
  doc["total_nodes"] = result.total_nodes;
  doc["total_cuts"] = result.total_cuts;
  Json iters = Json::array();
  for (const ProbeRecord& p : result.trace) {
    Json it;
    it["iteration"] = p.iteration;
    it["alpha"] = p.alpha;
    it["status"] = to_string(p.status);
    it["nodes"] = p.nodes;
    it["cuts"] = p.cuts;
    it["time_s"] = options.timing ? Json(p.elapsed_s) : Json(nullptr);
    iters.push_back(it);
  }
  doc["iterations"] = iters;
  doc["wall_time_s"] = options.timing ? Json(result.wall_time_s) : Json(nullptr);
  doc["diagnostic"] = result.diagnostic;
  doc["warnings"] = result.warnings;
  return doc.dump(2) + "\n";
}

}  // namespace apxne
