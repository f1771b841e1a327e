#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "apxne/cuts.hpp"
#include "apxne/error.hpp"
#include "fixtures.hpp"

using namespace apxne;
namespace fx = apxne::testing;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::Io;
}

double coef(const Cut& c, int index) {
  for (const Entry& e : c.coeffs) {
    if (e.index == index) return e.value;
  }
  return 0.0;
}

// Single player, one integer variable in [-3, 3], unvalidated so that own
// quadratic terms are allowed.
Game one_var(QuadraticCost cost) {
  return Game(Mode::Gnep, {PlayerBlock{1, 0, {-3.0}, {3.0}}}, {}, {std::move(cost)}, true);
}

}  // namespace

TEST(Dispatch, Targets) {
  const Game g = fx::gmp2();
  const LiftedLayout L(g, 0);
  std::vector<double> z(L.dim(), 0.0);
  // x = (0,0): pi = (2, 1), Phi = (1, 1)
  std::vector<BestResponse> br{{0, {1.0}, 1.0}, {1, {0.0}, 1.0}};
  z[L.phi(0)] = 2.0;
  z[L.phi(1)] = 1.0;
  z[L.pihat(0)] = 2.0;
  z[L.pihat(1)] = 0.0;
  const CutTargets t = dispatch_cut_targets(g, L, z, br);
  EXPECT_EQ(t.phi, std::vector<int>{0});
  EXPECT_EQ(t.pihat, std::vector<int>{1});

  z[L.phi(0)] = 1.0;
  z[L.pihat(1)] = 1.0;
  EXPECT_EQ(code_of([&] { dispatch_cut_targets(g, L, z, br); }), ErrorCode::DichotomyViolation);
}

TEST(FreeSetPhi, GnepToyRow) {
  const Game g = fx::gnep_toy();
  const LiftedLayout L(g, 0);
  std::vector<double> z(L.dim(), 0.0);
  z[L.phi(0)] = 0.0;  // Phi_1 = -2 at x_2 = 0
  BestResponse br{0, {2.0}, -2.0};
  const FreeSet set = build_free_set_phi(g, L, 0, z, br, 1.0);
  ASSERT_EQ(set.parts.size(), 2u);
  // x_2 - 1 < 0
  const QuadForm& row = set.parts[1];
  EXPECT_DOUBLE_EQ(row.constant, -1.0);
  ASSERT_EQ(row.linear.size(), 1u);
  EXPECT_EQ(row.linear[0].index, 1);
  EXPECT_DOUBLE_EQ(row.linear[0].value, 1.0);
  // -2 - phi_1 < 0
  EXPECT_DOUBLE_EQ(set.parts[0].eval(z), -2.0);

  EXPECT_EQ(code_of([&] { build_free_set_phi(g, L, 0, z, br, 0.0); }), ErrorCode::NotInInterior);
}

TEST(FreeSetPhi, Fg1SingleRow) {
  const Game g = fx::fg1();
  const ExtendedGame eg = linearize_bilinear(g);
  const LiftedLayout L(g, eg.num_aux());
  std::vector<double> z(L.dim(), 0.0);
  z[L.phi(0)] = 0.0;
  BestResponse br{0, {0, 1, 1}, -1.0};
  const FreeSet set = build_free_set_phi(g, L, 0, z, br, 1.0);
  ASSERT_EQ(set.parts.size(), 1u);
  // p_2 - 1 - phi_1 < 0
  EXPECT_DOUBLE_EQ(set.parts[0].constant, -1.0);
  z[4] = 2.0;
  EXPECT_DOUBLE_EQ(set.parts[0].eval(z), 1.0);
}

TEST(FreeSetPiConv, Examples) {
  const Game sq = one_var({0.0, {}, {{0, 0, 1.0}}, CostStructure::ConvexInAll});
  const LiftedLayout L(sq, 0);
  std::vector<double> z(L.dim(), 0.0);
  z[0] = 1.0;
  const FreeSet set = build_free_set_pi_conv(sq, L, 0, z);
  EXPECT_EQ(set.kind, FreeSetKind::GradientHalfspace);
  EXPECT_DOUBLE_EQ(set.parts[0].eval(z), -1.0);  // slack 1

  // every eq-tuple (pihat = pi) stays outside
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> w(L.dim(), 0.0);
    w[0] = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    w[L.pihat(0)] = w[0] * w[0];
    EXPECT_FALSE(set.contains(w));
  }

  const Game lin = one_var({0.0, {{0, 3.0}}, {}, CostStructure::ConvexInAll});
  std::vector<double> z0(L.dim(), 0.0);
  z0[L.pihat(0)] = -1.0;
  const FreeSet h = build_free_set_pi_conv(lin, L, 0, z0);
  // pihat - 3x < 0
  EXPECT_DOUBLE_EQ(h.parts[0].constant, 0.0);

  const Game conc = one_var({4.0, {}, {{0, 0, -1.0}}, CostStructure::ConcaveAllLinearInRivals});
  EXPECT_EQ(code_of([&] { build_free_set_pi_conv(conc, L, 0, z0); }), ErrorCode::WrongCostClass);
}

TEST(FreeSetPiConc, Examples) {
  const Game conc = one_var({4.0, {}, {{0, 0, -1.0}}, CostStructure::ConcaveAllLinearInRivals});
  const LiftedLayout L(conc, 0);
  std::vector<double> z(L.dim(), 0.0);
  const FreeSet set = build_free_set_pi_conc(conc, L, 0, z);
  EXPECT_TRUE(set.contains(z));
  std::vector<double> r(L.dim(), 0.0);
  r[0] = 1.0;
  EXPECT_DOUBLE_EQ(step_length(set.parts[0], z, r), 2.0);
  EXPECT_NEAR(step_length_bisection(set.parts[0], z, r), 2.0, 1e-9);

  const Game lin = one_var({0.0, {{0, 2.0}}, {}, CostStructure::ConvexInAll});
  z[0] = 1.0;
  const FreeSet h = build_free_set_pi_conc(lin, L, 0, z);
  EXPECT_TRUE(h.parts[0].quadratic.empty());

  const Game sq = one_var({0.0, {}, {{0, 0, 1.0}}, CostStructure::ConvexInAll});
  EXPECT_EQ(code_of([&] { build_free_set_pi_conc(sq, L, 0, z); }), ErrorCode::WrongCostClass);
}

TEST(StepLength, ClosedFormMatchesBisection) {
  std::mt19937_64 rng(11);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int k = 0; k < 2000; ++k) {
    QuadForm q;
    const std::vector<double> z{uni(-1, 1), uni(-1, 1)};
    const std::vector<double> r{uni(-2, 2), uni(-2, 2)};
    q.linear = {{0, uni(-2, 2)}, {1, uni(-2, 2)}};
    if (k % 2) q.quadratic = {{0, 0, uni(0, 2)}, {1, 1, uni(0, 2)}};
    q.constant = -(q.eval(z) - q.constant) - uni(0.01, 2.0);
    const double a = step_length(q, z, r);
    const double b = step_length_bisection(q, z, r);
    if (std::isinf(a)) {
      EXPECT_TRUE(std::isinf(b) || b > 1e11);
    } else {
      EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
    }
  }
}

TEST(IntersectionCut, SquareCorner) {
  lp::LpProblem p;
  p.lower = {0, 0};
  p.upper = {10, 10};
  p.objective = {1, 1};
  const lp::LpSolution s = lp::solve_lp(p);
  const auto rays = lp::corner_rays(p, s);
  FreeSet set{FreeSetKind::PolyhedralOpen, CutKind::IcPhi, 0, {QuadForm{-2.0, {{0, 1.0}, {1, 1.0}}, {}}}};
  const Cut cut = intersection_cut(p, s, rays, set);
  // z1 + z2 >= 2
  EXPECT_DOUBLE_EQ(coef(cut, 0), -1.0);
  EXPECT_DOUBLE_EQ(coef(cut, 1), -1.0);
  EXPECT_DOUBLE_EQ(cut.rhs, -2.0);
  EXPECT_DOUBLE_EQ(cut.violation, 2.0);
  EXPECT_FALSE(cut.global);

  FreeSet parallel{FreeSetKind::PolyhedralOpen, CutKind::IcPhi, 0, {QuadForm{-2.0, {{0, 1.0}}, {}}}};
  const Cut c2 = intersection_cut(p, s, rays, parallel);
  EXPECT_EQ(coef(c2, 1), 0.0);

  FreeSet never{FreeSetKind::PolyhedralOpen, CutKind::IcPhi, 0, {QuadForm{-2.0, {{0, -1.0}}, {}}}};
  EXPECT_EQ(code_of([&] { intersection_cut(p, s, rays, never); }), ErrorCode::NoViolation);
}

TEST(IntersectionCut, RandomGeometry) {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 1000; ++seed) {
    const fx::IcFixture f = fx::random_ic_fixture(seed);
    Cut cut;
    try {
      cut = intersection_cut(f.problem, f.solution, f.rays, f.set);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::NoViolation);
      continue;
    }
    ++checked;
    const std::vector<double>& z = f.solution.x;
    EXPECT_GT(cut.residual(z), 0.0);
    for (const lp::Ray& ray : f.rays) {
      const double eta = free_set_step(f.set, z, ray.direction);
      if (std::isinf(eta)) continue;
      std::vector<double> b(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) b[k] = z[k] + eta * ray.direction[k];
      EXPECT_NEAR(cut.residual(b), 0.0, 1e-7) << "seed " << seed;
      CutOptions bis;
      bis.bisection_only = true;
      EXPECT_NEAR(free_set_step(f.set, z, ray.direction, bis), eta, 1e-9 * std::max(1.0, eta));
    }
  }
}

TEST(BestResponseCut, Fg1) {
  const Game g = fx::fg1();
  const ExtendedGame eg = linearize_bilinear(g);
  const LiftedLayout L(g, eg.num_aux());
  const Cut flow = best_response_cut(eg, L, 0, {0, {0, 1, 1}, -1.0});
  // phi_1 - p_2 + 1 <= 0
  EXPECT_DOUBLE_EQ(coef(flow, L.phi(0)), 1.0);
  EXPECT_DOUBLE_EQ(coef(flow, 4), -1.0);
  EXPECT_DOUBLE_EQ(coef(flow, 3), 0.0);
  EXPECT_DOUBLE_EQ(flow.rhs, -1.0);
  EXPECT_TRUE(flow.global);
  std::vector<double> z(L.dim(), 0.0);
  EXPECT_DOUBLE_EQ(flow.residual(z), 1.0);

  const Cut auth = best_response_cut(eg, L, 1, {1, {0, 0}, 0.0});
  for (const Entry& e : auth.coeffs) {
    if (e.index != L.phi(1)) EXPECT_EQ(e.value, 0.0);
  }
  EXPECT_DOUBLE_EQ(coef(auth, L.phi(1)), 1.0);
  EXPECT_DOUBLE_EQ(auth.rhs, 0.0);

  EXPECT_EQ(code_of([&] { best_response_cut(linearize_bilinear(fx::gnep_toy()), LiftedLayout(fx::gnep_toy(), 0), 0,
                                            {0, {2.0}, -2.0}); }),
            ErrorCode::WrongMode);
}

TEST(RootPiHatCuts, Rows) {
  const Game g = fx::scalar_players(Mode::Nep, {{0, 2}, {0, 1}},
                                    {{0.0, {{0, 3.0}}, {}, CostStructure::ConvexInAll},
                                     {5.0, {}, {}, CostStructure::ConvexInAll}});
  const ExtendedGame eg = linearize_bilinear(g);
  const LiftedLayout L(g, eg.num_aux());
  const auto cuts = root_pihat_cuts(eg, L);
  ASSERT_EQ(cuts.size(), 2u);
  // 3x - pihat_1 <= 0
  EXPECT_DOUBLE_EQ(coef(cuts[0], 0), 3.0);
  EXPECT_DOUBLE_EQ(coef(cuts[0], L.pihat(0)), -1.0);
  EXPECT_DOUBLE_EQ(cuts[0].rhs, 0.0);
  // -pihat_2 <= -5
  EXPECT_DOUBLE_EQ(coef(cuts[1], L.pihat(1)), -1.0);
  EXPECT_DOUBLE_EQ(cuts[1].rhs, -5.0);

  const Game fg = fx::fg1();
  const ExtendedGame efg = linearize_bilinear(fg);
  const LiftedLayout LF(fg, efg.num_aux());
  const Cut flow = root_pihat_cuts(efg, LF)[0];
  // w_1 + w_2 - 3 x_1 - x_2 - pihat_1 <= 0
  EXPECT_DOUBLE_EQ(coef(flow, 0), -3.0);
  EXPECT_DOUBLE_EQ(coef(flow, 1), -1.0);
  for (int k = 0; k < efg.num_aux(); ++k) {
    for (const auto& link : efg.products()) {
      if (LF.from_extended(link.aux) == LF.aux(k)) EXPECT_DOUBLE_EQ(coef(flow, LF.aux(k)), 1.0);
    }
  }
}
