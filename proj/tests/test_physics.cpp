#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lunar/physics_env.hpp"

using namespace lunar;

namespace {

PhysicsParams high_spawn() {
  PhysicsParams p;
  p.spawn_height = 100.0;
  p.init_impulse = 0.0;
  return p;
}

LanderState at_rest(double x, double y) {
  LanderState s;
  s.x = x;
  s.y = y;
  return s;
}

}  // namespace

TEST_SUITE("physics") {

TEST_CASE("action encoding is stable") {
  CHECK(to_index(Action::Noop) == 0);
  CHECK(to_index(Action::FireLeft) == 1);
  CHECK(to_index(Action::FireMain) == 2);
  CHECK(to_index(Action::FireRight) == 3);
  CHECK(action_from_index(2) == Action::FireMain);
  CHECK_THROWS_AS(action_from_index(4), std::out_of_range);
  CHECK_THROWS_AS(action_from_index(-1), std::out_of_range);
}

TEST_CASE("reset with zero impulse starts at the spawn point") {
  PhysicsParams p;
  p.init_impulse = 0.0;
  LanderEnv env(p);
  Rng rng(3);
  const LanderState s = env.reset(rng);
  CHECK(s == at_rest(0.0, p.spawn_height));
  CHECK_FALSE(env.done());
}

TEST_CASE("reset is deterministic and centred") {
  LanderEnv a, b;
  Rng ra(11), rb(11);
  CHECK(a.reset(ra) == b.reset(rb));

  LanderEnv env;
  Rng rng(5);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = env.reset(rng);
    CHECK(std::abs(s.vx) <= env.params().init_impulse);
    sum += s.vx;
  }
  CHECK(std::abs(sum / n) < 0.01);
}

TEST_CASE("noop from rest falls by exactly gravity times dt") {
  LanderEnv env(high_spawn());
  env.reset_to(at_rest(0.0, 50.0));
  const auto out = env.step(Action::Noop);
  CHECK(out.state.vy == -env.params().gravity * env.params().dt);
  CHECK(out.state.vx == 0.0);
  CHECK(out.state.omega == 0.0);
}

TEST_CASE("free fall follows the semi-implicit closed form") {
  const PhysicsParams p = high_spawn();
  LanderEnv env(p);
  env.reset_to(at_rest(0.0, p.spawn_height));
  const double g = p.gravity, dt = p.dt;
  for (int k = 1; k <= 500; ++k) {
    const auto out = env.step(Action::Noop);
    REQUIRE_FALSE(out.terminal);
    CHECK(std::abs(out.state.vy + k * g * dt) < 1e-9);
    CHECK(std::abs(out.state.y - (p.spawn_height - g * dt * dt * k * (k + 1) / 2.0)) < 1e-9);
  }
}

TEST_CASE("engines push along the body axes") {
  PhysicsParams p;
  LanderState s;
  auto main = engine_acceleration(s, Action::FireMain, p);
  CHECK(main.x() == doctest::Approx(0.0));
  CHECK(main.y() == doctest::Approx(p.main_engine_power));
  CHECK(engine_acceleration(s, Action::FireLeft, p).x() == doctest::Approx(p.side_engine_power));
  CHECK(engine_acceleration(s, Action::FireRight, p).x() == doctest::Approx(-p.side_engine_power));
  CHECK(engine_acceleration(s, Action::Noop, p).isZero());

  s.theta = std::numbers::pi / 2;  // lying on its side: main thrust points left
  main = engine_acceleration(s, Action::FireMain, p);
  CHECK(main.x() == doctest::Approx(-p.main_engine_power));
  CHECK(main.y() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("side engines apply opposite torques") {
  LanderEnv env(high_spawn());
  env.reset_to(at_rest(0.0, 50.0));
  CHECK(env.step(Action::FireLeft).state.omega > 0.0);
  env.reset_to(at_rest(0.0, 50.0));
  CHECK(env.step(Action::FireRight).state.omega < 0.0);
}

TEST_CASE("reward identity holds on every step") {
  LanderEnv env;
  Rng rng(9), pick(10);
  env.reset(rng);
  while (!env.done()) {
    const auto out = env.step(static_cast<Action>(pick.below(4)));
    const auto& b = out.breakdown;
    CHECK(out.reward == -100.0 * b.d_delta - 100.0 * b.v_delta - 100.0 * b.omega_delta + b.landed_bonus);
    CHECK(out.terminal == (out.verdict != Verdict::Flying));
  }
}

TEST_CASE("make_reward examples") {
  CHECK(make_reward(-0.1, 0.0, 0.0, 0.0).total == doctest::Approx(10.0));
  CHECK(make_reward(0.0, 0.0, 0.0, 0.0).total == 0.0);
}

TEST_CASE("has_landed coefficients") {
  LanderState s;
  CHECK(has_landed(s, Verdict::Flying) == 0.0);
  s.left_contact = s.right_contact = true;
  CHECK(has_landed(s, Verdict::Landed) == 120.0);
  s.right_contact = false;
  CHECK(has_landed(s, Verdict::Crashed) == -90.0);
}

TEST_CASE("classify") {
  PhysicsParams p;
  LanderState s;
  s.left_contact = s.right_contact = true;
  CHECK(classify(s, p, 10, p.settle_steps) == Verdict::Landed);
  CHECK(classify(s, p, 10, p.settle_steps - 1) == Verdict::Flying);

  LanderState air = at_rest(0.0, 1.0);
  CHECK(classify(air, p, p.max_steps, 0) == Verdict::Timeout);
  CHECK(classify(air, p, p.max_steps - 1, 0) == Verdict::Flying);

  LanderState fast = s;
  fast.vy = -10 * p.landing_speed_limit;
  CHECK(classify(fast, p, 5, 0) == Verdict::Crashed);

  LanderState wide = s;
  wide.x = p.pad_half_width + 0.01;
  CHECK(classify(wide, p, 5, 0) == Verdict::Crashed);

  LanderState tilted = s;
  tilted.theta = p.tilt_limit + 0.01;
  CHECK(classify(tilted, p, 5, 0) == Verdict::Crashed);

  LanderState away = at_rest(p.bounds_x + 0.01, 0.5);
  CHECK(classify(away, p, 5, 0) == Verdict::OutOfBounds);
}

TEST_CASE("a slow touchdown on the pad settles into a landing") {
  PhysicsParams p;
  LanderEnv env(p);
  LanderState s = at_rest(0.0, 0.02);
  s.vy = -0.05;
  env.reset_to(s);
  StepOutcome out;
  int steps = 0;
  do {
    out = env.step(Action::Noop);
    ++steps;
  } while (!out.terminal && steps < 100);
  CHECK(out.verdict == Verdict::Landed);
  CHECK(out.breakdown.landed_bonus == 120.0);
}

TEST_CASE("hard touchdown crashes") {
  LanderEnv env;
  LanderState s = at_rest(0.0, 0.02);
  s.vy = -2.0;
  env.reset_to(s);
  const auto out = env.step(Action::Noop);
  CHECK(out.verdict == Verdict::Crashed);
  CHECK(out.terminal);
}

TEST_CASE("stepping a finished episode is an error") {
  LanderEnv env;
  CHECK_THROWS_AS(env.step(Action::Noop), std::logic_error);
  LanderState s = at_rest(0.0, 0.02);
  s.vy = -2.0;
  env.reset_to(s);
  env.step(Action::Noop);
  CHECK_THROWS_AS(env.step(Action::Noop), std::logic_error);
}

TEST_CASE("identical seeds and actions give identical episodes") {
  auto episode = [](std::uint64_t seed) {
    LanderEnv env;
    Rng rng(seed), pick(seed + 100);
    env.reset(rng);
    std::vector<StepOutcome> trace;
    while (!env.done()) trace.push_back(env.step(static_cast<Action>(pick.below(4))));
    return trace;
  };
  const auto a = episode(21), b = episode(21);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == b[i].state);
    CHECK(a[i].reward == b[i].reward);
  }
}

TEST_CASE("parameter validation") {
  PhysicsParams p;
  CHECK_NOTHROW(p.validate());
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.side_engine_power = p.main_engine_power;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.max_steps = 0;
  CHECK_THROWS_AS(LanderEnv{p}, std::invalid_argument);
}

TEST_CASE("verdict names round-trip") {
  for (auto v : {Verdict::Flying, Verdict::Landed, Verdict::Crashed, Verdict::OutOfBounds,
                 Verdict::Timeout}) {
    CHECK(verdict_from_name(verdict_name(v)) == v);
  }
  CHECK_FALSE(verdict_from_name("hovering").has_value());
}

}  // TEST_SUITE
