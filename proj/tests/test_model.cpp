#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diraclab/model.hpp"

using namespace diraclab;
using Catch::Approx;

TEST_CASE("grid construction") {
  TraitGrid g = TraitGrid::from_step(-2.0, 2.0, 1e-3);
  CHECK(g.n_points == 4001);
  CHECK(g.dx == Approx(1e-3).epsilon(1e-12));
  CHECK(g.x(0) == -2.0);
  CHECK(g.x(g.n_points - 1) == Approx(2.0).margin(1e-12));

  CHECK_THROWS_AS(TraitGrid::from_points(1.0, -1.0, 11), ConfigError);
  CHECK_THROWS_AS(TraitGrid::from_points(-1.0, 1.0, 2), ConfigError);
  CHECK_THROWS_AS(TraitGrid::from_step(-1.0, 1.0, 0.33), ConfigError);
}

TEST_CASE("growth rate evaluation") {
  GrowthModel quad = GrowthModel::polynomial(Polynomial({0.25, 0.0, -1.0}));
  CHECK(quad.rate(0.0, 0.0) == 0.25);
  CHECK(quad.rate(0.5, 0.0) == 0.0);
  CHECK(quad.rate(0.0, 0.2) == Approx(0.05));

  GrowthModel quartic = GrowthModel::polynomial(Polynomial({0.0, 0.0, -1.5, 2.75, -1.0}));
  CHECK(quartic.rate(0.75, 0.0) == Approx(0.0).margin(1e-15));
  CHECK(quartic.rate_dx(0.0) == 0.0);

  GrowthModel vertex = GrowthModel::quadratic(0.5, 2.0, 0.3);
  CHECK(vertex.rate(0.3, 0.0) == Approx(0.5));
  CHECK(vertex.rate_dx(0.3) == Approx(0.0).margin(1e-15));
  CHECK(vertex.rate_dxx(-5.0) == Approx(-4.0));
  CHECK_THROWS_AS(GrowthModel::quadratic(0.5, 0.0, 0.0), ConfigError);
}

TEST_CASE("analytic gradient matches centered differences") {
  GrowthModel m = GrowthModel::polynomial(Polynomial({0.0, 0.0, -1.5, 2.75, -1.0}));
  const double h = 1e-6;
  for (double x = -2.0; x <= 2.0; x += 0.37) {
    double fd = (m.rate(x + h, 0.3) - m.rate(x - h, 0.3)) / (2.0 * h);
    double an = m.rate_dx(x, 0.3);
    CHECK(an == Approx(fd).margin(1e-6 * std::max(1.0, std::abs(an))));
  }
}

TEST_CASE("growth bounds on the truncated domain") {
  TraitGrid g = TraitGrid::from_step(-3.0, 3.0, 1e-2);
  GrowthModel m = GrowthModel::quadratic(0.25, 1.0, 0.0);
  GrowthBounds b = GrowthBounds::derive(m, g);
  CHECK(b.I_M == Approx(0.25));
  CHECK(b.K1 == 1.0);
  // max_x R(x, I_M) = 0 at the derived cap
  CHECK(m.a().max_on(g.x_min, g.x_max).value - b.I_M == Approx(0.0).margin(1e-12));
  // grid scan: R <= K0 and R >= -K2 - K3 x^2 for I in [0, 2 I_M]
  for (int i = 0; i < g.n_points; ++i) {
    for (double I : {0.0, b.I_M, 2.0 * b.I_M}) {
      double r = m.rate(g.x(i), I);
      CHECK(r <= b.K0 + 1e-12);
      CHECK(r >= -b.K2 - b.K3 * g.x(i) * g.x(i) - 1e-12);
    }
  }
  // a model that is never viable needs an explicit cap
  GrowthModel dead = GrowthModel::polynomial(Polynomial({-1.0, 0.0, -1.0}));
  CHECK_THROWS_AS(GrowthBounds::derive(dead, g), ConfigError);
  CHECK(GrowthBounds::derive(dead, g, 0.5).I_M == 0.5);
}

TEST_CASE("consumption weight bounds") {
  TraitGrid g = TraitGrid::from_step(-1.0, 1.0, 1e-2);
  auto c = ConsumptionWeight::constant(2.0);
  CHECK(c(0.3) == 2.0);
  auto b = c.bounds_on(g);
  CHECK(b.psi_m == 2.0);
  CHECK(b.psi_M == 2.0);

  auto p = ConsumptionWeight::polynomial(Polynomial({1.0, 0.0, 1.0}));  // 1 + x^2 > 0
  auto pb = p.bounds_on(g);
  CHECK(pb.psi_m == Approx(1.0));
  CHECK(pb.psi_M == Approx(2.0));

  auto bad = ConsumptionWeight::polynomial(Polynomial({0.0, 1.0}));  // vanishes at 0
  CHECK_THROWS_AS(bad.bounds_on(g), ConfigError);
  CHECK_THROWS_AS(ConsumptionWeight::constant(0.0), ConfigError);
}

TEST_CASE("box sampling has exact quadrature mass") {
  TraitGrid g = TraitGrid::from_step(-2.0, 2.0, 1e-3);
  auto ic = InitialCondition::box(-0.6, -0.4, 0.2);
  auto n = ic.sample(g, 1e-3);
  double mass = 0.0;
  for (int i = 0; i < g.n_points; ++i)
    mass += ((i == 0 || i == g.n_points - 1) ? 0.5 : 1.0) * n[i] * g.dx;
  CHECK(mass == Approx(0.2).margin(4e-4));  // nominal tolerance; cell averages are exact
  CHECK(mass == Approx(0.2).epsilon(1e-12));
  for (double v : n) CHECK(v >= 0.0);

  // unaligned box still has exact mass
  auto ic2 = InitialCondition::box(-0.6004, -0.40037, 0.2);
  auto n2 = ic2.sample(g, 1e-3);
  double mass2 = 0.0;
  for (int i = 0; i < g.n_points; ++i)
    mass2 += ((i == 0 || i == g.n_points - 1) ? 0.5 : 1.0) * n2[i] * g.dx;
  CHECK(mass2 == Approx(0.2).epsilon(1e-9));
}

TEST_CASE("gaussian sampling is renormalized") {
  TraitGrid g = TraitGrid::from_step(-3.0, 3.0, 1e-3);
  const double eps = 1e-3;
  auto n = InitialCondition::gaussian(0.0, 0.2).sample(g, eps);
  double mass = 0.0;
  for (int i = 0; i < g.n_points; ++i)
    mass += ((i == 0 || i == g.n_points - 1) ? 0.5 : 1.0) * n[i] * g.dx;
  CHECK(mass == Approx(0.2).epsilon(1e-12));

  auto gs = InitialCondition::ground_state_gaussian(1.0, 0.0, 0.25).sample(g, eps);
  double peak = *std::max_element(gs.begin(), gs.end());
  CHECK(peak == Approx(0.25 / std::sqrt(2.0 * M_PI * eps)).epsilon(1e-6));

  // vanishing-mass component carries mass eps
  auto mix = InitialCondition::mixture({
      InitialCondition::Component{InitialCondition::Kind::Gaussian, 0, 0, -0.75, 1.0, 0.2, false},
      InitialCondition::Component{InitialCondition::Kind::Gaussian, 0, 0, 0.0, 1.0, 1.0, true},
  });
  auto nm = mix.sample(g, eps);
  double mm = 0.0;
  for (int i = 0; i < g.n_points; ++i)
    mm += ((i == 0 || i == g.n_points - 1) ? 0.5 : 1.0) * nm[i] * g.dx;
  CHECK(mm == Approx(0.2 + eps).epsilon(1e-9));
}

TEST_CASE("initial data outside the domain is rejected") {
  TraitGrid g = TraitGrid::from_step(-1.0, 1.0, 1e-2);
  CHECK_THROWS_AS(InitialCondition::box(2.0, 3.0, 0.1).sample(g, 1e-3), ConfigError);
  CHECK_THROWS_AS(InitialCondition::gaussian(1.5, 0.1).sample(g, 1e-3), ConfigError);
  CHECK_THROWS_AS(InitialCondition::box(0.5, 0.2, 0.1), ConfigError);
  CHECK_THROWS_AS(InitialCondition::gaussian(0.0, -0.1), ConfigError);
}

TEST_CASE("limit support and gamma0") {
  auto mix = InitialCondition::mixture({
      InitialCondition::Component{InitialCondition::Kind::Gaussian, 0, 0, -0.75, 1.0, 0.2, false},
      InitialCondition::Component{InitialCondition::Kind::Gaussian, 0, 0, 0.0, 1.0, 1.0, true},
  });
  auto supp = mix.limit_support();
  REQUIRE(supp.size() == 1);
  CHECK(supp[0].lo == -0.75);
  auto g0 = mix.gamma0();
  REQUIRE(g0.size() == 2);
  CHECK(g0[1].lo == 0.0);

  auto box = InitialCondition::box(-0.7, -0.6, 0.2);
  REQUIRE(box.gamma0().size() == 1);
  CHECK(box.gamma0()[0].lo == -0.7);
  CHECK(box.gamma0()[0].hi == -0.6);
}

TEST_CASE("schedule lookup is right-continuous and periodic") {
  auto sched = EnvironmentSchedule::piecewise({{0.0, 0}, {0.5, 1}}, 1.0);
  CHECK(sched.model_at(0.0) == 0);
  CHECK(sched.model_at(0.5) == 1);   // switch instant belongs to the new segment
  CHECK(sched.model_at(0.25) == 0);
  CHECK(sched.model_at(1.25) == 0);  // periodic reduction
  CHECK(sched.model_at(1.75) == 1);

  for (double ts : {0.5, 1.0, 1.5}) CHECK(sched.model_at(ts) == sched.model_at(ts + 1e-12));

  auto sw = sched.next_switch_after(0.0, 10.0);
  REQUIRE(sw.has_value());
  CHECK(sw->t == 0.5);
  CHECK(sw->model == 1);
  sw = sched.next_switch_after(0.5, 10.0);
  REQUIRE(sw.has_value());
  CHECK(sw->t == 1.0);
  CHECK(sw->model == 0);
  CHECK_FALSE(sched.next_switch_after(9.9, 10.0)->t > 10.0);

  auto single = EnvironmentSchedule::single(0);
  CHECK_FALSE(single.next_switch_after(0.0, 100.0).has_value());

  CHECK_THROWS_AS(EnvironmentSchedule::piecewise({{0.1, 0}}, std::nullopt), ConfigError);
  CHECK_THROWS_AS(EnvironmentSchedule::piecewise({{0.0, 0}, {0.0, 1}}, std::nullopt), ConfigError);
  CHECK_THROWS_AS(EnvironmentSchedule::piecewise({{0.0, 0}, {0.5, 1}}, 0.4), ConfigError);
}
