#include <gtest/gtest.h>

#include <random>

#include "apxne/bestresponse.hpp"
#include "apxne/error.hpp"
#include "apxne/oracle.hpp"
#include "fixtures.hpp"

using namespace apxne;
namespace fx = apxne::testing;

namespace {

MipRegion box(std::vector<double> lo, std::vector<double> hi, std::vector<lp::LpRow> rows = {}) {
  MipRegion r;
  r.integer.assign(lo.size(), true);
  r.lower = std::move(lo);
  r.upper = std::move(hi);
  r.rows = std::move(rows);
  return r;
}

}  // namespace

TEST(Mip, SpecExamples) {
  MipResult a = mip_minimize({1.0}, box({0}, {1}, {{{{0, -1.0}}, -0.4}}));
  EXPECT_EQ(a.x, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(a.value, 1.0);

  MipResult b = mip_minimize({-1.0, -1.0}, box({0, 0}, {1, 1}, {{{{0, 1.0}, {1, 1.0}}, 1.5}}));
  EXPECT_EQ(b.x, (std::vector<double>{1.0, 0.0}));
  EXPECT_DOUBLE_EQ(b.value, -1.0);

  try {
    mip_minimize({0.0}, box({0}, {5}, {{{{0, 1.0}}, -1.0}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(Mip, MatchesEnumeration) {
  std::mt19937_64 rng(7);
  auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 300; ++trial) {
    const int n = draw(1, 3);
    std::vector<double> lo(n), hi(n), c(n);
    for (int v = 0; v < n; ++v) {
      lo[v] = draw(-2, 1);
      hi[v] = lo[v] + draw(0, 3);
      c[v] = draw(-5, 5);
    }
    std::vector<lp::LpRow> rows;
    for (int r = draw(0, 2); r > 0; --r) {
      lp::LpRow row{{}, draw(-3, 6) + 0.5};
      for (int v = 0; v < n; ++v) row.coeffs.push_back({v, static_cast<double>(draw(-3, 3))});
      rows.push_back(row);
    }
    std::optional<double> best;
    std::vector<double> x = lo;
    while (true) {
      bool ok = true;
      for (const auto& row : rows) ok = ok && dot(row.coeffs, x) <= row.rhs;
      double v = 0;
      for (int k = 0; k < n; ++k) v += c[k] * x[k];
      if (ok && (!best || v < *best)) best = v;
      int k = n - 1;
      while (k >= 0 && x[k] >= hi[k]) {
        x[k] = lo[k];
        --k;
      }
      if (k < 0) break;
      x[k] += 1;
    }
    const MipRegion region = box(lo, hi, rows);
    if (!best) {
      EXPECT_THROW(mip_minimize(c, region), Error);
      continue;
    }
    const MipResult r = mip_minimize(c, region);
    EXPECT_NEAR(r.value, *best, 1e-9) << "trial " << trial;
  }
}

TEST(BestResponse, SpecExamples) {
  QuadraticCost c{0.0, {{0, -1.0}}, {}, CostStructure::ConvexInAll};
  const Game g = fx::scalar_players(Mode::Nep, {{0, 2}}, {c});
  std::vector<double> x{0.0};
  const BestResponse br = best_response(g, 0, x);
  EXPECT_EQ(br.y, std::vector<double>{2.0});
  EXPECT_DOUBLE_EQ(br.value, -2.0);

  const Game fg = fx::fg1();
  // layout: x_e1, x_e2, z, p_1, p_2
  std::vector<double> prof{0, 0, 0, 7, 0};
  const BestResponse flow = best_response(fg, 0, prof);
  EXPECT_EQ(flow.y, (std::vector<double>{0, 1, 1}));
  EXPECT_DOUBLE_EQ(flow.value, -1.0);

  std::vector<double> at_target{0, 1, 1, 3, 2};
  const BestResponse auth = best_response(fg, 1, at_target);
  EXPECT_EQ(auth.y, (std::vector<double>{0, 0}));
  EXPECT_DOUBLE_EQ(auth.value, 0.0);
}

TEST(BestResponse, GnepRowsFollowRivals) {
  const Game g = fx::gnep_toy();
  std::vector<double> x{0, 1};
  EXPECT_EQ(best_response(g, 0, x).y, std::vector<double>{1.0});
  const MipRegion r = own_region(g, 0, x);
  EXPECT_FALSE(r.empty);
}

TEST(BestResponse, MatchesOracleOnRandomGames) {
  for (auto family : {fx::RandomFamily::Nep, fx::RandomFamily::Gnep}) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const Game g = fx::random_game(family, seed);
      for (const auto& p : oracle::analyze(g).profiles) {
        for (int i = 0; i < g.num_players(); ++i) {
          const BestResponse br = best_response(g, i, p.x);
          EXPECT_NEAR(br.value, oracle::to_double(p.phi[i]), 1e-9);
          const auto& set = p.best_responses[i];
          EXPECT_NE(std::find(set.begin(), set.end(), br.y), set.end());
        }
      }
    }
  }
}
