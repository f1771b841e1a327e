#pragma once

// Brute-force ground truth for small all-integer games, in exact rational
// arithmetic (every double coefficient converts exactly).

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

#include "apxne/bnc.hpp"
#include "apxne/model.hpp"

namespace apxne::oracle {

using Rational = boost::multiprecision::cpp_rational;
using Profile = std::vector<double>;

/// Every lattice point of the bound box that satisfies all rows.
/// Throws HasContinuous, TooLarge (more than max_points box points).
std::vector<Profile> enumerate_profiles(const Game& game, long max_points = 1'000'000);

Rational exact_cost(const Game& game, int i, const Profile& x);

/// Player i's strategies feasible against the rivals of x (own entries of x ignored).
std::vector<std::vector<double>> own_strategies(const Game& game, int i, const Profile& x);

/// Alpha values (>= 1) for which a profile is an (alpha, 0)-equilibrium:
/// [lo, hi], hi absent for +infinity; empty when no alpha works.
struct AlphaInterval {
  bool empty = false;
  Rational lo = 1;
  std::optional<Rational> hi;

  bool contains(const Rational& alpha) const {
    return !empty && alpha >= lo && (!hi || alpha <= *hi);
  }
};

struct ProfileInfo {
  Profile x;
  std::vector<Rational> pi;
  std::vector<Rational> phi;
  std::vector<std::vector<std::vector<double>>> best_responses;  // argmin sets per player
  AlphaInterval alpha;
};

struct OracleReport {
  std::vector<ProfileInfo> profiles;
  /// nullopt: no alpha admits an (alpha, 0)-equilibrium.
  std::optional<Rational> alpha_min;
  std::vector<std::size_t> br_family_sizes;
};

OracleReport analyze(const Game& game, long max_points = 1'000'000);

/// pi_i(x) <= alpha_i Phi_i(x_{-i}) + beta_i, exactly.
bool is_equilibrium(const ProfileInfo& info, const Approximation& approx);

std::vector<Profile> brute_ne_set(const Game& game, const Approximation& approx);
std::vector<Profile> brute_ne_set(const OracleReport& report, const Approximation& approx);

std::optional<Rational> brute_alpha_min(const Game& game);

/// Distinct best-response sets of player i over all feasible rival profiles.
std::vector<std::vector<std::vector<double>>> brute_br_family(const Game& game, int i);

/// JSON document; ne_set included when approx is given.
std::string report_document(const OracleReport& report, const std::optional<Approximation>& approx);

double to_double(const Rational& r);

}  // namespace apxne::oracle
