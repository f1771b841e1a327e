#include <gtest/gtest.h>

#include <json.hpp>

#include "apxne/bnc.hpp"
#include "apxne/error.hpp"
#include "apxne/oracle.hpp"
#include "fixtures.hpp"

using namespace apxne;
namespace fx = apxne::testing;

TEST(CheckNe, SpecExamples) {
  const Game g = fx::gmp2();
  std::vector<double> x{0, 0};
  NeCheck c = check_ne(g, x, Approximation::uniform(2, 1.0));
  EXPECT_FALSE(c.is_ne);
  EXPECT_EQ(c.violators, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(c.pi[0], 2.0);
  EXPECT_DOUBLE_EQ(c.br[0].value, 1.0);
  EXPECT_TRUE(check_ne(g, x, Approximation::uniform(2, 2.0)).is_ne);
  EXPECT_TRUE(check_ne(g, x, Approximation::uniform(2, 1.0, 1.0)).is_ne);
}

TEST(CheckApproximation, Rejects) {
  const Game g = fx::gmp2();
  for (const Approximation& a : {Approximation{{0.5, 1.0}, {0.0, 0.0}}, Approximation{{1.0, 1.0}, {-1.0, 0.0}},
                                 Approximation{{1.0}, {0.0}}}) {
    try {
      BncSolver s(g, a);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidApproximation);
    }
  }
}

TEST(Bnc, T1RootSolves) {
  BncSolver solver(fx::t1(), Approximation::uniform(1, 1.0));
  double root_lambda = 1.0;
  solver.set_observer([&](const SearchEvent& e, const SearchState&) {
    if (e.kind == SearchEvent::Kind::LpSolved && e.node == 0) root_lambda = e.point[solver.layout().lambda()];
  });
  const SolveResult r = solver.solve();
  EXPECT_EQ(r.status, SolveStatus::NeFound);
  EXPECT_EQ(r.witness, std::vector<double>{0.0});
  EXPECT_EQ(r.stats.nodes, 1);
  EXPECT_DOUBLE_EQ(root_lambda, -1.0);
}

TEST(Bnc, Gmp2) {
  EXPECT_EQ(solve(fx::gmp2(), Approximation::uniform(2, 2.0)).status, SolveStatus::NeFound);
  const SolveResult r = solve(fx::gmp2(), Approximation::uniform(2, 1.0));
  EXPECT_EQ(r.status, SolveStatus::NoNeExists);
  EXPECT_GT(r.stats.cuts.br, 0);
  EXPECT_EQ(r.stats.cuts.ic_phi, 0);
}

TEST(Bnc, MatchingPennies) {
  EXPECT_EQ(solve(fx::matching_pennies(), Approximation::uniform(2, 50.0)).status, SolveStatus::NoNeExists);
  EXPECT_EQ(solve(fx::matching_pennies(), Approximation::uniform(2, 1.0, 1.0)).status, SolveStatus::NeFound);
}

TEST(Bnc, GnepToy) {
  const SolveResult r = solve(fx::gnep_toy(), Approximation::uniform(2, 1.0));
  ASSERT_EQ(r.status, SolveStatus::NeFound);
  EXPECT_DOUBLE_EQ(r.witness[0] + r.witness[1], 2.0);
  EXPECT_EQ(solve(fx::gnep_toy(), Approximation::uniform(2, 3.0)).status, SolveStatus::NoNeExists);
}

TEST(Bnc, Fg1ImplementsTarget) {
  const auto inst = fx::fg1_instance();
  const SolveResult r = solve(fx::fg1(), Approximation::uniform(2, 1.0));
  ASSERT_EQ(r.status, SolveStatus::NeFound) << r.diagnostic;
  const auto d = flow::decode(inst, r.witness);
  EXPECT_TRUE(flow::check_implementation(inst, d.flows, d.prices).all());
}

TEST(Bnc, ResumeAfterNeFoundReturnsSameNode) {
  BncSolver solver(fx::gnep_toy(), Approximation::uniform(2, 1.0));
  const SolveResult a = solver.solve();
  const SolveResult b = solver.solve();
  EXPECT_EQ(a.status, SolveStatus::NeFound);
  EXPECT_EQ(a.witness, b.witness);
}

TEST(Bnc, NodeLimit) {
  const SolveResult r = solve(fx::gmp2(), Approximation::uniform(2, 1.0), {}, Limits{3600.0, 1, -1});
  EXPECT_EQ(r.status, SolveStatus::NodeLimit);
}

TEST(Bnc, RetargetChecksDirection) {
  BncSolver solver(fx::gmp2(), Approximation::uniform(2, 2.0));
  EXPECT_THROW(solver.retarget(Approximation::uniform(2, 2.0), true), Error);
  EXPECT_THROW(solver.retarget(Approximation::uniform(2, 3.0), true), Error);
  solver.retarget(Approximation::uniform(2, 1.5), true);
  EXPECT_EQ(solver.state().approx.alpha[0], 1.5);
}

TEST(Bnc, ResultDocumentShape) {
  const SolveResult r = solve(fx::t1(), Approximation::uniform(1, 1.0));
  const auto doc = nlohmann::ordered_json::parse(solve_result_document(r, {false}));
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"status", "witness", "alpha", "beta", "stats", "wall_time_s",
                                            "diagnostic", "warnings"}));
  EXPECT_TRUE(doc["wall_time_s"].is_null());
  EXPECT_EQ(doc["status"], "NeFound");
}

TEST(Bnc, AgreesWithOracleOnRandomGames) {
  const std::vector<Approximation> grid{Approximation::uniform(3, 1.0), Approximation::uniform(3, 2.0),
                                        Approximation::uniform(3, 1.0, 1.0)};
  for (auto family : {fx::RandomFamily::Nep, fx::RandomFamily::Gnep}) {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      const Game g = fx::random_game(family, seed);
      const auto report = oracle::analyze(g);
      for (Approximation a : grid) {
        a.alpha.resize(g.num_players());
        a.beta.resize(g.num_players());
        const auto ne = oracle::brute_ne_set(report, a);
        const SolveResult r = solve(g, a);
        ASSERT_TRUE(r.status == SolveStatus::NeFound || r.status == SolveStatus::NoNeExists)
            << "seed " << seed << ": " << r.diagnostic;
        EXPECT_EQ(r.status == SolveStatus::NeFound, !ne.empty()) << "seed " << seed;
        if (r.status == SolveStatus::NeFound) {
          EXPECT_NE(std::find(ne.begin(), ne.end(), r.witness), ne.end()) << "seed " << seed;
        }
      }
    }
  }
}
