#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "diraclab/config.hpp"
#include "diraclab/scenarios.hpp"

using namespace diraclab;
using Catch::Approx;

namespace {

const char* kMinimal = R"(
# minimal single-environment run
[grid]
x_min = -2
x_max = 2
dx = 0.01

[solver]
epsilon = 0.01
dt = 0.001
t_end = 1

[model.1]
form = quadratic
r = 0.25
g = 1
theta = 0

[ic]
kind = box
b = -0.6
c = -0.4
mass = 0.2
)";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  RunConfig rc = load_config(kMinimal);
  CHECK(rc.grid.n_points == 401);
  CHECK(rc.eps == 0.01);
  CHECK(rc.t_end == 1.0);
  CHECK(rc.models.size() == 1);
  CHECK(rc.psi.is_constant());
  CHECK(rc.psi.constant_value() == 1.0);
  CHECK(rc.u_floor == -2.0);
  CHECK(rc.output.trajectory == "trajectory.csv");
  CHECK(rc.output.deterministic);
}

TEST_CASE("parse errors carry line numbers and locations") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      load_config(text);
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_error("[grid\nx_min = 0", "line 1");
  expect_error("x_min = 0\n", "outside any section");
  expect_error("[solver]\ndt = fast\n", "[solver].dt (line 2)");
  expect_error("[solver]\ndt = 0.1\ndt = 0.2\n", "duplicate key");
  expect_error("[bogus]\nx = 1\n", "unknown section");
  expect_error(std::string(kMinimal) + "\n[solver2]\n", "unknown section");

  // unknown key inside a known section
  std::string bad = kMinimal;
  bad.replace(bad.find("epsilon"), 7, "epsilom");
  expect_error(bad, "unknown key");

  // missing required key
  std::string no_tend = kMinimal;
  no_tend.replace(no_tend.find("t_end = 1"), 9, "# t_end");
  expect_error(no_tend, "[solver].t_end");
}

TEST_CASE("validation rejects an unstable step") {
  std::string cfg = kMinimal;
  cfg.replace(cfg.find("dt = 0.001"), 10, "dt = 0.5");
  CHECK_THROWS_WITH(load_config(cfg), Catch::Matchers::ContainsSubstring("stability"));
}

TEST_CASE("overrides rewrite entries by section.key") {
  RunConfig rc = load_config(kMinimal, {"solver.t_end=5", "model.1.r=0.5", "ic.mass=0.4"});
  CHECK(rc.t_end == 5.0);
  CHECK(rc.models[0].quad_r() == 0.5);
  CHECK(rc.ic.components()[0].mass == 0.4);
  CHECK_THROWS_AS(load_config(kMinimal, {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(load_config(kMinimal, {"t_end=5"}), ConfigError);
}

TEST_CASE("epsilon-scaled mass survives parsing and serialization") {
  std::string cfg = std::string(kMinimal) + R"(
[ic.1]
kind = gaussian
center = -0.75
mass = 0.2

[ic.2]
kind = gaussian
center = 0
mass = eps
)";
  // both [ic] and [ic.N] present is ambiguous
  CHECK_THROWS_WITH(load_config(cfg), Catch::Matchers::ContainsSubstring("[ic]"));

  std::string text = R"(
[grid]
x_min = -2
x_max = 2
dx = 0.01

[solver]
epsilon = 0.01
dt = 0.001
t_end = 1

[model.1]
form = quadratic
r = 0.25
g = 1
theta = 0

[ic.1]
kind = gaussian
center = -0.75
mass = 0.2

[ic.2]
kind = gaussian
center = 0
mass = eps
)";
  RunConfig rc = load_config(text);
  REQUIRE(rc.ic.components().size() == 2);
  CHECK(rc.ic.components()[1].mass_is_epsilon);
  std::string out = serialize_config(rc);
  CHECK(out.find("mass = eps") != std::string::npos);
  RunConfig rc2 = load_config(out);
  CHECK(serialize_config(rc2) == out);
}

TEST_CASE("schedule and sweep sections") {
  std::string text = R"(
[grid]
x_min = -3
x_max = 3
dx = 0.01

[solver]
epsilon = 0.01
dt = 0.001
t_end = 2

[model.1]
form = quadratic
r = 0.5
g = 1
theta = -0.5

[model.2]
form = quadratic
r = 0.5
g = 1
theta = 0.5

[schedule]
segments = 0:1, 0.5:2
period = 1

[sweep]
param = T
values = 0.2, 1

[ic]
kind = ground_state_gaussian
center = 0
g = 1
mass = 0.25
)";
  RunConfig rc = load_config(text);
  REQUIRE(rc.models.size() == 2);
  CHECK(rc.schedule.period().value() == 1.0);
  CHECK(rc.schedule.model_at(0.75) == 1);
  REQUIRE(rc.sweep_values.size() == 2);
  CHECK(rc.sweep_values[1] == 1.0);

  // model id out of range
  std::string bad = text;
  bad.replace(bad.find("0.5:2"), 5, "0.5:7");
  CHECK_THROWS_WITH(load_config(bad), Catch::Matchers::ContainsSubstring("out of range"));

  // two models without a schedule
  std::string nosched = text;
  std::size_t a = nosched.find("[schedule]");
  std::size_t b = nosched.find("[sweep]");
  nosched.erase(a, b - a);
  CHECK_THROWS_WITH(load_config(nosched), Catch::Matchers::ContainsSubstring("[schedule]"));
}

TEST_CASE("every preset round-trips through the serializer unchanged") {
  for (const std::string& id : preset_ids()) {
    RunConfig rc = preset(id).config;
    std::string s1 = serialize_config(rc);
    RunConfig rc2 = load_config(s1);
    std::string s2 = serialize_config(rc2);
    INFO(id);
    CHECK(s1 == s2);
  }
}

TEST_CASE("hj section round-trips") {
  RunConfig rc = preset("fig5-slow").config;
  REQUIRE(rc.hj.x0.has_value());
  std::string s = serialize_config(rc);
  RunConfig rc2 = load_config(s);
  CHECK(rc2.hj.x0.value() == 0.0);
  CHECK(rc2.hj.M0.value() == 1.0);
  CHECK(rc2.hj.dt == 1e-3);
}
