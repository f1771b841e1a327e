#include "apxne/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <sys/resource.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "apxne/adaptive.hpp"
#include "apxne/error.hpp"
#include "apxne/flowgame.hpp"
#include "apxne/instance_io.hpp"
#include "apxne/oracle.hpp"

namespace apxne {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string instance;
  std::vector<double> alpha{1.0};
  std::vector<double> beta{0.0};
  double time_limit = 3600.0;
  long node_limit = -1;
  double tol_ne = 1e-8;
  double tol_prune = 1e-5;
  double tol_cut = 5e-6;
  double memory_mb = 3072.0;
  std::string out;
  bool no_timing = false;
};

void add_instance(CLI::App* app, Common& c) {
  app->add_option("--instance", c.instance, "instance document (JSON)")->required();
}

void add_limits(CLI::App* app, Common& c) {
  app->add_option("--time-limit", c.time_limit, "wall-clock limit in seconds")->capture_default_str();
  app->add_option("--node-limit", c.node_limit, "node limit per solve (negative: none)")->capture_default_str();
  app->add_option("--tol-ne", c.tol_ne, "equilibrium check tolerance")->capture_default_str();
  app->add_option("--tol-prune", c.tol_prune, "prune nodes with LP value above this")->capture_default_str();
  app->add_option("--tol-cut", c.tol_cut, "minimum violation of an accepted cut")->capture_default_str();
  app->add_option("--memory-mb", c.memory_mb, "advisory peak memory; exceeding it only warns")
      ->capture_default_str();
  app->add_option("--out", c.out, "output file (default: stdout)");
  app->add_flag("--no-timing", c.no_timing, "write null for wall-clock fields (byte-stable output)");
}

BncOptions bnc_options(const Common& c) {
  BncOptions o;
  o.tol_ne = c.tol_ne;
  o.tol_prune = c.tol_prune;
  o.cut.min_violation = c.tol_cut;
  return o;
}

Limits limits_of(const Common& c) {
  Limits l;
  l.time_s = c.time_limit;
  l.nodes = c.node_limit;
  return l;
}

std::vector<double> per_player(const std::vector<double>& v, int n, const char* name) {
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (static_cast<int>(v.size()) != n) {
    throw Error(ErrorCode::InvalidApproximation,
                fmt::format("--{} needs 1 or {} values, got {}", name, n, v.size()));
  }
  return v;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

void memory_check(const Common& c, std::ostream& err) {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_mb = usage.ru_maxrss / 1024.0;
  if (peak_mb > c.memory_mb) {
    err << fmt::format("warning: peak memory {:.0f} MB exceeded the advisory limit of {:.0f} MB\n", peak_mb,
                       c.memory_mb);
  }
}

int exit_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::NeFound: return kExitFound;
    case SolveStatus::NoNeExists: return kExitNotFound;
    default: return kExitLimit;
  }
}

int exit_for(AlphaStatus s) {
  switch (s) {
    case AlphaStatus::Converged: return kExitFound;
    case AlphaStatus::AlphaUnbounded: return kExitNotFound;
    case AlphaStatus::LimitHit: return kExitLimit;
  }
  return kExitLimit;
}

bool is_solved(const Json& doc) {
  const std::string s = doc.value("status", "");
  return s == "NeFound" || s == "NoNeExists" || s == "Converged" || s == "AlphaUnbounded";
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::pair<std::string, std::string> build_report(const std::string& results_dir) {
  if (!fs::is_directory(results_dir)) throw Error(ErrorCode::Io, "not a directory: '" + results_dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<double>> times;   // solved wall times per variant
  std::map<std::string, std::vector<double>> alphas;  // converged alpha_hi per variant
  for (const fs::path& f : files) {
    Json doc;
    try {
      doc = Json::parse(read_file(f.string()));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, f.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("status")) continue;
    const std::string variant = doc.value("variant", "solve");
    times[variant];
    if (is_solved(doc)) {
      const Json& t = doc["wall_time_s"];
      times[variant].push_back(t.is_number() ? t.get<double>() : 0.0);
    }
    if (doc["status"] == "Converged" && doc["alpha_hi"].is_number()) {
      alphas[variant].push_back(doc["alpha_hi"].get<double>());
    }
  }

  // cumulative counts at every distinct value
  auto table = [](const std::string& key, std::map<std::string, std::vector<double>>& columns,
                  const std::vector<std::string>& names) {
    std::string out = key;
    for (const std::string& n : names) out += "," + n;
    out += "\n";
    std::set<double> points;
    for (auto& [name, values] : columns) {
      std::sort(values.begin(), values.end());
      points.insert(values.begin(), values.end());
    }
    for (double p : points) {
      out += num(p);
      for (const std::string& n : names) {
        const auto& v = columns[n];
        out += "," + std::to_string(std::upper_bound(v.begin(), v.end(), p) - v.begin());
      }
      out += "\n";
    }
    return out;
  };
  std::vector<std::string> names;
  for (const auto& [name, _] : times) names.push_back(name);
  return {table("time_s", times, names), table("alpha", alphas, names)};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Approximate pure Nash equilibria of integer games by branch-and-cut", "apxne");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common solve_cfg;
  CLI::App* solve_cmd = app.add_subcommand("solve", "search for an (alpha, beta)-approximate equilibrium");
  add_instance(solve_cmd, solve_cfg);
  solve_cmd->add_option("--alpha", solve_cfg.alpha, "alpha, one value or one per player (>= 1)")
      ->delimiter(',')
      ->capture_default_str();
  solve_cmd->add_option("--beta", solve_cfg.beta, "beta, one value or one per player (>= 0)")
      ->delimiter(',')
      ->capture_default_str();
  add_limits(solve_cmd, solve_cfg);

  Common ba_cfg;
  std::string variant = "reuse-cuts";
  AlphaSearchOptions search;
  std::string trace_path;
  CLI::App* ba_cmd = app.add_subcommand("best-alpha", "binary search for the smallest uniform alpha");
  add_instance(ba_cmd, ba_cfg);
  ba_cmd->add_option("--variant", variant, "multitree, reuse-tree or reuse-cuts")->capture_default_str();
  ba_cmd->add_option("--alpha0", search.alpha0, "first alpha tried")->capture_default_str();
  ba_cmd->add_option("--factor", search.factor, "growth factor while no equilibrium is found")
      ->capture_default_str();
  ba_cmd->add_option("--max-growth", search.max_growth, "growth steps before giving up")->capture_default_str();
  ba_cmd->add_option("--tol", search.tol, "final interval width")->capture_default_str();
  ba_cmd->add_option("--trace", trace_path, "CSV trace of the probes");
  add_limits(ba_cmd, ba_cfg);

  flow::GenerateParams gen;
  int count = 1;
  std::string gen_out;
  std::string gen_dir;
  CLI::App* gen_cmd = app.add_subcommand("generate", "random flow pricing instances");
  gen_cmd->add_option("--nodes", gen.nodes)->capture_default_str();
  gen_cmd->add_option("--edges", gen.edges)->capture_default_str();
  gen_cmd->add_option("--players", gen.players)->capture_default_str();
  gen_cmd->add_option("--demand-min", gen.demand_min)->capture_default_str();
  gen_cmd->add_option("--demand-max", gen.demand_max)->capture_default_str();
  gen_cmd->add_option("--mu-min", gen.mu_min)->capture_default_str();
  gen_cmd->add_option("--mu-max", gen.mu_max)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_flag("--same-source", gen.same_source, "all players start at one node");
  gen_cmd->add_flag("--identical-mu", gen.identical_mu, "all players share one utility vector");
  gen_cmd->add_option("--count", count, "instances, seeds seed .. seed + count - 1")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output file for a single instance (default: stdout)");
  gen_cmd->add_option("--out-dir", gen_dir, "directory for flow_<seed>.json files");

  Common verify_cfg;
  CLI::App* verify_cmd = app.add_subcommand("verify", "brute-force oracle report for a small integer game");
  add_instance(verify_cmd, verify_cfg);
  verify_cmd->add_option("--alpha", verify_cfg.alpha, "alpha for the equilibrium set")->delimiter(',');
  verify_cmd->add_option("--beta", verify_cfg.beta, "beta for the equilibrium set")->delimiter(',');
  verify_cmd->add_option("--out", verify_cfg.out, "output file (default: stdout)");

  std::string results_dir;
  std::string report_out = ".";
  CLI::App* report_cmd = app.add_subcommand("report", "ECDF tables from a directory of result documents");
  report_cmd->add_option("--results", results_dir, "directory of *.json result documents")->required();
  report_cmd->add_option("--out", report_out, "directory for ecdf.csv and alpha.csv")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) {
      const Game game = load_instance_file(solve_cfg.instance);
      const int n = game.num_players();
      const Approximation approx{per_player(solve_cfg.alpha, n, "alpha"), per_player(solve_cfg.beta, n, "beta")};
      const SolveResult r = solve(game, approx, bnc_options(solve_cfg), limits_of(solve_cfg));
      emit(solve_cfg, solve_result_document(r, {!solve_cfg.no_timing}), out);
      for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
      memory_check(solve_cfg, err);
      return exit_for(r.status);
    }
    if (ba_cmd->parsed()) {
      AlphaVariant v;
      try {
        v = parse_variant(variant);
      } catch (const Error& e) {
        err << e.what() << "\n";
        return kExitUsage;
      }
      const Game game = load_instance_file(ba_cfg.instance);
      search.bnc = bnc_options(ba_cfg);
      search.limits = limits_of(ba_cfg);
      const AlphaSearchResult r = best_alpha(game, v, search);
      emit(ba_cfg, alpha_result_document(r, {!ba_cfg.no_timing}), out);
      if (!trace_path.empty()) write_file(trace_path, alpha_trace_csv(r, !ba_cfg.no_timing));
      for (const std::string& w : r.warnings) err << "warning: " << w << "\n";
      memory_check(ba_cfg, err);
      return exit_for(r.status);
    }
    if (gen_cmd->parsed()) {
      if (count < 1 || (count > 1 && gen_dir.empty())) {
        err << "--count above 1 needs --out-dir\n";
        return kExitUsage;
      }
      if (!gen_dir.empty()) fs::create_directories(gen_dir);
      const std::uint64_t first = gen.seed;
      for (int k = 0; k < count; ++k) {
        gen.seed = first + k;
        const std::string text = flow::serialize_flow_instance(flow::generate(gen));
        if (!gen_dir.empty()) {
          write_file((fs::path(gen_dir) / fmt::format("flow_{}.json", gen.seed)).string(), text);
        } else if (!gen_out.empty()) {
          write_file(gen_out, text);
        } else {
          out << text;
        }
      }
      return 0;
    }
    if (verify_cmd->parsed()) {
      const Game game = load_instance_file(verify_cfg.instance);
      const int n = game.num_players();
      std::optional<Approximation> approx;
      if (verify_cmd->count("--alpha") + verify_cmd->count("--beta") > 0) {
        approx = Approximation{per_player(verify_cfg.alpha, n, "alpha"), per_player(verify_cfg.beta, n, "beta")};
        check_approximation(game, *approx);
      }
      emit(verify_cfg, oracle::report_document(oracle::analyze(game), approx), out);
      return 0;
    }
    if (report_cmd->parsed()) {
      const auto [ecdf, alpha] = build_report(results_dir);
      fs::create_directories(report_out);
      write_file((fs::path(report_out) / "ecdf.csv").string(), ecdf);
      write_file((fs::path(report_out) / "alpha.csv").string(), alpha);
      return 0;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::InvalidApproximation ? kExitUsage : kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace apxne
