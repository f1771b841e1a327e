#include "fixtures.hpp"

#include <random>

namespace apxne::testing {

Game scalar_players(Mode mode, std::vector<std::pair<double, double>> boxes,
                    std::vector<QuadraticCost> costs, std::vector<LinearRow> rows) {
  std::vector<PlayerBlock> players;
  for (auto [lo, hi] : boxes) players.push_back({1, 0, {lo}, {hi}});
  Game g(mode, std::move(players), std::move(rows), std::move(costs), true);
  validate_game(g);
  return g;
}

Game t1() {
  return scalar_players(Mode::Nep, {{0, 1}}, {{0.0, {{0, 1.0}}, {}, CostStructure::ConvexInAll}});
}

Game gmp2() {
  QuadraticCost c1{2.0, {{0, -1.0}, {1, -1.0}}, {{0, 1, 2.0}}, CostStructure::BilinearOwnRival};
  QuadraticCost c2{1.0, {{0, 1.0}, {1, 1.0}}, {{0, 1, -2.0}}, CostStructure::BilinearOwnRival};
  return scalar_players(Mode::Nep, {{0, 1}, {0, 1}}, {c1, c2});
}

Game matching_pennies() {
  QuadraticCost c1{0.0, {{0, 1.0}, {1, 1.0}}, {{0, 1, -2.0}}, CostStructure::BilinearOwnRival};
  QuadraticCost c2{1.0, {{0, -1.0}, {1, -1.0}}, {{0, 1, 2.0}}, CostStructure::BilinearOwnRival};
  return scalar_players(Mode::Nep, {{0, 1}, {0, 1}}, {c1, c2});
}

Game gnep_toy() {
  QuadraticCost c1{0.0, {{0, -1.0}}, {}, CostStructure::ConvexInAll};
  QuadraticCost c2{0.0, {{1, -1.0}}, {}, CostStructure::ConvexInAll};
  std::vector<LinearRow> rows{{0, {{0, 1.0}, {1, 1.0}}, 2.0}, {1, {{0, 1.0}, {1, 1.0}}, 2.0}};
  return scalar_players(Mode::Gnep, {{0, 2}, {0, 2}}, {c1, c2}, rows);
}

}  // namespace apxne::testing

namespace apxne::testing {

flow::FlowInstance fg1_instance() {
  flow::FlowInstance inst;
  inst.num_nodes = 2;
  inst.edges = {{0, 1}, {0, 1}};
  inst.players = {{0, 1, 1.0, {3.0, 1.0}}};
  inst.capacity = {1.0, 1.0};
  inst.target_load = {0.0, 1.0};
  inst.price_max = {7.0, 7.0};
  return inst;
}

Game fg1() { return flow::encode(fg1_instance()); }

namespace {

struct Draw {
  std::mt19937_64 rng;
  int operator()(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

}  // namespace

Game random_game(RandomFamily family, std::uint64_t seed) {
  Draw draw{std::mt19937_64(seed)};
  const bool positive = family == RandomFamily::NepPositive;
  const int n = draw(2, 3);

  std::vector<PlayerBlock> players;
  std::vector<LinearRow> rows;
  for (int i = 0; i < n; ++i) {
    if (family != RandomFamily::Gnep && draw(0, 2) == 0) {
      // two binaries, optionally exclusive: 3 or 4 strategies
      players.push_back({2, 0, {0.0, 0.0}, {1.0, 1.0}});
    } else {
      const double lo = positive ? 0.0 : draw(-2, 0);
      players.push_back({1, 0, {lo}, {lo + draw(1, 4)}});
    }
  }
  Game shape(family == RandomFamily::Gnep ? Mode::Gnep : Mode::Nep, players, {}, {}, true);
  const int nx = shape.num_vars();
  for (int i = 0; i < n; ++i) {
    if (players[i].size() == 2 && draw(0, 1) == 0) {
      rows.push_back({i, {{shape.offset(i), 1.0}, {shape.offset(i) + 1, 1.0}}, 1.0});
    }
  }

  std::vector<double> x0(nx);
  for (int v = 0; v < nx; ++v) x0[v] = draw(static_cast<int>(shape.lower(v)), static_cast<int>(shape.upper(v)));

  std::vector<QuadraticCost> costs;
  for (int i = 0; i < n; ++i) {
    QuadraticCost c;
    const int coef_lo = positive ? 0 : -5;
    c.constant = draw(coef_lo, 5);
    for (int v = 0; v < nx; ++v) {
      const int a = draw(coef_lo, 5);
      if (a != 0) c.linear.push_back({v, static_cast<double>(a)});
    }
    std::vector<int> rivals;
    for (int v = 0; v < nx; ++v) {
      if (shape.owner_of(v) != i) rivals.push_back(v);
    }
    if (family == RandomFamily::Gnep) {
      // c (w^T x_{-i})^2
      if (draw(0, 1) == 1) {
        std::vector<int> w;
        for (std::size_t r = 0; r < rivals.size(); ++r) w.push_back(draw(-1, 1));
        for (std::size_t a = 0; a < rivals.size(); ++a) {
          for (std::size_t b = a; b < rivals.size(); ++b) {
            const double q = (a == b ? 1.0 : 2.0) * w[a] * w[b];
            if (q != 0.0) c.quadratic.push_back({rivals[a], rivals[b], q});
          }
        }
      }
      c.structure = CostStructure::ConvexInAll;
    } else {
      for (int v = shape.offset(i); v < shape.offset(i) + players[i].size(); ++v) {
        for (int r : rivals) {
          if (draw(0, 1) == 0) continue;
          const int q = draw(coef_lo, 5);
          if (q != 0) c.quadratic.push_back({std::min(v, r), std::max(v, r), static_cast<double>(q)});
        }
      }
      c.structure = c.quadratic.empty() ? CostStructure::ConvexInAll : CostStructure::BilinearOwnRival;
    }
    costs.push_back(std::move(c));

    if (family == RandomFamily::Gnep) {
      LinearRow row{i, {}, 0.0};
      double at_x0 = 0.0;
      for (int v = 0; v < nx; ++v) {
        const int a = draw(-3, 3);
        if (a == 0) continue;
        row.coeffs.push_back({v, static_cast<double>(a)});
        at_x0 += a * x0[v];
      }
      row.rhs = at_x0 + draw(0, 2);
      if (!row.coeffs.empty()) rows.push_back(std::move(row));
    }
  }

  Game g(shape.mode(), std::move(players), std::move(rows), std::move(costs), true);
  validate_game(g);
  return g;
}

}  // namespace apxne::testing

namespace apxne::testing {

IcFixture random_ic_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  IcFixture f;
  while (true) {
    const int n = pick(2, 4);
    lp::LpProblem& p = f.problem;
    p = {};
    std::vector<double> center(n);
    for (int v = 0; v < n; ++v) {
      p.lower.push_back(pick(-5, 0));
      p.upper.push_back(p.lower[v] + pick(1, 6));
      p.objective.push_back(pick(-3, 3));
      center[v] = 0.5 * (p.lower[v] + p.upper[v]);
    }
    for (int r = pick(0, 3); r > 0; --r) {
      lp::LpRow row;
      double at_center = 0.0;
      for (int v = 0; v < n; ++v) {
        const double a = pick(-3, 3);
        if (a == 0.0) continue;
        row.coeffs.push_back({v, a});
        at_center += a * center[v];
      }
      row.rhs = at_center + pick(0, 3);
      p.rows.push_back(std::move(row));
    }
    f.solution = lp::solve_lp(p);
    if (f.solution.status != lp::LpStatus::Optimal) continue;
    f.rays = lp::corner_rays(p, f.solution);
    if (f.rays.empty()) continue;
    break;
  }

  const std::vector<double>& z = f.solution.x;
  const int n = static_cast<int>(z.size());
  const int shape = pick(0, 2);
  f.set = {};
  f.set.kind = shape == 1 ? FreeSetKind::ConvexEpigraph : FreeSetKind::PolyhedralOpen;
  if (shape != 1) {
    for (int h = pick(1, 2); h > 0; --h) {
      QuadForm part;
      double at_z = 0.0;
      for (int v = 0; v < n; ++v) {
        const double a = uni(-2.0, 2.0);
        part.linear.push_back({v, a});
        at_z += a * z[v];
      }
      part.constant = -(at_z + uni(0.1, 3.0));
      f.set.parts.push_back(std::move(part));
    }
  }
  if (shape != 0) {
    // sum d_v (z_v - c_v)^2 - R^2
    QuadForm ball;
    double at_z = 0.0;
    for (int v = 0; v < n; ++v) {
      const double d = uni(0.2, 2.0);
      const double c = z[v] + uni(-1.0, 1.0);
      ball.quadratic.push_back({v, v, d});
      ball.linear.push_back({v, -2.0 * d * c});
      ball.constant += d * c * c;
      at_z += d * (z[v] - c) * (z[v] - c);
    }
    ball.constant -= at_z + uni(0.1, 3.0);
    f.set.parts.push_back(std::move(ball));
  }
  return f;
}

}  // namespace apxne::testing
