#pragma once

// Small hand-checkable games shared by the unit and acceptance tests.

#include <cstdint>

#include "apxne/cuts.hpp"
#include "apxne/flowgame.hpp"
#include "apxne/lp.hpp"
#include "apxne/model.hpp"

namespace apxne::testing {

/// One integer player, x in {0,1}, cost x.
Game t1();

/// Two binary players. pi_1 = 2 - x1 - x2 + 2 x1 x2, pi_2 = 1 + x1 + x2 - 2 x1 x2.
/// No pure NE; every profile is a (2,0)-NE.
Game gmp2();

/// 0/1 matching pennies: pi_1 = x1 + x2 - 2 x1 x2, pi_2 = 1 - pi_1.
Game matching_pennies();

/// GNEP with shared row x1 + x2 <= 2, x_i in {0,1,2}, pi_i = -x_i.
Game gnep_toy();

/// Builds a game of integer players, one variable each, with the given boxes.
Game scalar_players(Mode mode, std::vector<std::pair<double, double>> boxes,
                    std::vector<QuadraticCost> costs, std::vector<LinearRow> rows = {});

/// Flow game with two nodes, parallel edges 0->1, one unit of demand and
/// mu = (3, 1); the target load puts the unit on the second edge.
flow::FlowInstance fg1_instance();
Game fg1();

enum class RandomFamily {
  Nep,          // linear plus own x rival bilinear costs
  Gnep,         // one coupling row per player, linear plus PSD rival-rival costs
  NepPositive,  // nonnegative boxes and coefficients, so every Phi >= 0
};

/// Small random all-integer game: 2-3 players, at most 5 strategies each,
/// integer data in [-5, 5].
Game random_game(RandomFamily family, std::uint64_t seed);

/// LP vertex with its corner rays and a free set holding the vertex inside.
struct IcFixture {
  lp::LpProblem problem;
  lp::LpSolution solution;
  std::vector<lp::Ray> rays;
  FreeSet set;
};

/// Random 2-4 variable LP plus a polyhedral, ball-shaped or mixed free set.
IcFixture random_ic_fixture(std::uint64_t seed);

}  // namespace apxne::testing
