#include "apxne/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "apxne/error.hpp"

namespace apxne::oracle {

namespace {

Rational exact(double v) { return Rational(v); }

bool rows_hold(const Game& game, const Profile& x, int only_owner) {
  for (const LinearRow& row : game.constraints()) {
    if (only_owner >= 0 && row.owner != only_owner) continue;
    Rational lhs = 0;
    for (const Entry& e : row.coeffs) lhs += exact(e.value) * exact(x[e.index]);
    if (lhs > exact(row.rhs)) return false;
  }
  return true;
}

// Calls f for every lattice point of the box of vars [first, first + count).
template <typename F>
void for_each_point(const Game& game, int first, int count, Profile& x, F&& f) {
  for (int v = first; v < first + count; ++v) x[v] = game.lower(v);
  while (true) {
    f();
    int v = first + count - 1;
    while (v >= first && x[v] >= game.upper(v)) {
      x[v] = game.lower(v);
      --v;
    }
    if (v < first) return;
    x[v] += 1.0;
  }
}

}  // namespace

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::vector<Profile> enumerate_profiles(const Game& game, long max_points) {
  double total = 1.0;
  for (int v = 0; v < game.num_vars(); ++v) {
    if (!game.is_integer(v)) throw Error(ErrorCode::HasContinuous, "oracle needs an all-integer game");
    total *= game.upper(v) - game.lower(v) + 1.0;
  }
  if (total > static_cast<double>(max_points)) {
    throw Error(ErrorCode::TooLarge, "bound box has " + std::to_string(total) + " lattice points");
  }
  std::vector<Profile> out;
  Profile x(game.num_vars(), 0.0);
  if (game.num_vars() == 0) return {x};
  for_each_point(game, 0, game.num_vars(), x, [&] {
    if (rows_hold(game, x, -1)) out.push_back(x);
  });
  return out;
}

Rational exact_cost(const Game& game, int i, const Profile& x) {
  const QuadraticCost& c = game.cost(i);
  Rational v = exact(c.constant);
  for (const Entry& e : c.linear) v += exact(e.value) * exact(x[e.index]);
  for (const QuadTerm& t : c.quadratic) v += exact(t.coeff) * exact(x[t.a]) * exact(x[t.b]);
  return v;
}

std::vector<std::vector<double>> own_strategies(const Game& game, int i, const Profile& x) {
  const int off = game.offset(i);
  const int size = game.player(i).size();
  Profile z = x;
  std::vector<std::vector<double>> out;
  if (size == 0) return {{}};
  for_each_point(game, off, size, z, [&] {
    if (rows_hold(game, z, i)) out.emplace_back(z.begin() + off, z.begin() + off + size);
  });
  return out;
}

OracleReport analyze(const Game& game, long max_points) {
  OracleReport report;
  const int n = game.num_players();
  std::vector<std::set<std::vector<std::vector<double>>>> families(n);
  for (Profile& x : enumerate_profiles(game, max_points)) {
    ProfileInfo info;
    info.best_responses.resize(n);
    for (int i = 0; i < n; ++i) {
      info.pi.push_back(exact_cost(game, i, x));
      const int off = game.offset(i);
      std::optional<Rational> best;
      Profile z = x;
      for (const auto& y : own_strategies(game, i, x)) {
        std::copy(y.begin(), y.end(), z.begin() + off);
        const Rational v = exact_cost(game, i, z);
        if (!best || v < *best) {
          best = v;
          info.best_responses[i].clear();
        }
        if (v == *best) info.best_responses[i].push_back(y);
      }
      info.phi.push_back(*best);
      families[i].insert(info.best_responses[i]);

      AlphaInterval& a = info.alpha;
      const Rational& pi = info.pi[i];
      const Rational& phi = info.phi[i];
      if (phi > 0) {
        a.lo = std::max(a.lo, Rational(pi / phi));
      } else if (phi == 0) {
        if (pi > 0) a.empty = true;
      } else {
        const Rational bound = pi / phi;
        a.hi = a.hi ? std::min(*a.hi, bound) : bound;
      }
    }
    if (info.alpha.hi && *info.alpha.hi < info.alpha.lo) info.alpha.empty = true;
    if (!info.alpha.empty && (!report.alpha_min || info.alpha.lo < *report.alpha_min)) {
      report.alpha_min = info.alpha.lo;
    }
    info.x = std::move(x);
    report.profiles.push_back(std::move(info));
  }
  for (const auto& f : families) report.br_family_sizes.push_back(f.size());
  return report;
}

bool is_equilibrium(const ProfileInfo& info, const Approximation& approx) {
  for (std::size_t i = 0; i < info.pi.size(); ++i) {
    if (info.pi[i] > exact(approx.alpha[i]) * info.phi[i] + exact(approx.beta[i])) return false;
  }
  return true;
}

std::vector<Profile> brute_ne_set(const OracleReport& report, const Approximation& approx) {
  std::vector<Profile> out;
  for (const ProfileInfo& info : report.profiles) {
    if (is_equilibrium(info, approx)) out.push_back(info.x);
  }
  return out;
}

std::vector<Profile> brute_ne_set(const Game& game, const Approximation& approx) {
  return brute_ne_set(analyze(game), approx);
}

std::optional<Rational> brute_alpha_min(const Game& game) { return analyze(game).alpha_min; }

std::vector<std::vector<std::vector<double>>> brute_br_family(const Game& game, int i) {
  std::set<std::vector<std::vector<double>>> family;
  for (const ProfileInfo& info : analyze(game).profiles) family.insert(info.best_responses[i]);
  return {family.begin(), family.end()};
}

std::string report_document(const OracleReport& report, const std::optional<Approximation>& approx) {
  using Json = nlohmann::ordered_json;
  auto num = [](const Rational& r) { return to_double(r); };
  Json doc;
  doc["num_profiles"] = report.profiles.size();
  doc["alpha_min"] = report.alpha_min ? Json(num(*report.alpha_min)) : Json("Unbounded");
  doc["br_family_sizes"] = report.br_family_sizes;
  Json profiles = Json::array();
  for (const ProfileInfo& info : report.profiles) {
    Json p;
    p["x"] = info.x;
    Json pi = Json::array();
    Json phi = Json::array();
    for (std::size_t i = 0; i < info.pi.size(); ++i) {
      pi.push_back(num(info.pi[i]));
      phi.push_back(num(info.phi[i]));
    }
    p["pi"] = pi;
    p["phi"] = phi;
    if (info.alpha.empty) {
      p["alpha_interval"] = nullptr;
    } else {
      p["alpha_interval"] = Json::array({num(info.alpha.lo), info.alpha.hi ? Json(num(*info.alpha.hi)) : Json("inf")});
    }
    profiles.push_back(p);
  }
  doc["profiles"] = profiles;
  if (approx) {
    doc["alpha"] = approx->alpha;
    doc["beta"] = approx->beta;
    doc["ne_set"] = brute_ne_set(report, *approx);
  }
  return doc.dump(2) + "\n";
}

}  // namespace apxne::oracle
