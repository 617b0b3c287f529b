#include <doctest.h>

#include <cmath>
#include <vector>

#include "lunar/uncertainty.hpp"
#include "oracles.hpp"

using namespace lunar;

TEST_SUITE("uncertainty") {

TEST_CASE("zero noise is the identity") {
  LanderState s;
  s.x = 0.3;
  s.y = 0.7;
  s.vx = -0.2;
  s.left_contact = true;
  Rng rng(1);
  CHECK(apply_obs_noise(s, NoiseSpec{0.0}, rng) == s);
}

TEST_CASE("noise touches positions only") {
  LanderState s;
  s.x = 0.1;
  s.y = 0.5;
  s.vx = 0.25;
  s.vy = -0.125;
  s.theta = 0.05;
  s.omega = -0.3;
  s.right_contact = true;
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto o = apply_obs_noise(s, NoiseSpec{0.5}, rng);
    CHECK(o.vx == s.vx);
    CHECK(o.vy == s.vy);
    CHECK(o.theta == s.theta);
    CHECK(o.omega == s.omega);
    CHECK(o.left_contact == s.left_contact);
    CHECK(o.right_contact == s.right_contact);
  }
  const auto x_only = apply_obs_noise(s, NoiseSpec{0.5, false}, rng);
  CHECK(x_only.y == s.y);
  CHECK(x_only.x != s.x);
}

TEST_CASE("noise standard deviation") {
  Rng rng(3);
  LanderState s;
  std::vector<double> dx(200000);
  for (auto& d : dx) d = apply_obs_noise(s, NoiseSpec{0.05}, rng).x;
  CHECK(std::abs(oracle::stddev(dx) - 0.05) < 0.0005);
  CHECK(std::abs(oracle::mean(dx)) < 0.0005);
}

TEST_CASE("engine failure") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    CHECK(apply_engine_failure(Action::Noop, FailureSpec{0.9}, rng) == Action::Noop);
  }
  CHECK(apply_engine_failure(Action::FireMain, FailureSpec{0.0}, rng) == Action::FireMain);
  CHECK(apply_engine_failure(Action::FireLeft, FailureSpec{1.0}, rng) == Action::Noop);

  int failed = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) failed += apply_engine_failure(Action::FireMain, {0.2}, rng) == Action::Noop;
  CHECK(std::abs(failed / double(n) - 0.2) < 0.01);
}

TEST_CASE("force presets scale with engine power") {
  const double P = 6.0;
  auto f = force_preset("regular_00", P);
  CHECK(f.mean_x == 0.0);
  CHECK(f.mean_y == 0.0);
  CHECK(f.variance == doctest::Approx(2.0));
  f = force_preset("regular_01", P);
  CHECK(f.mean_x == 0.0);
  CHECK(f.mean_y == doctest::Approx(1.0));
  f = force_preset("regular_10", P);
  CHECK(f.mean_x == doctest::Approx(1.0));
  CHECK(f.mean_y == 0.0);
  f = force_preset("regular_11", P);
  CHECK(f.mean_x == doctest::Approx(1.0));
  CHECK(f.mean_y == doctest::Approx(1.0));
  f = force_preset("medium", P);
  CHECK(f.mean_x == doctest::Approx(6.0));
  CHECK(f.variance == doctest::Approx(18.0));
  f = force_preset("large", P);
  CHECK(f.mean_y == doctest::Approx(12.0));
  CHECK(f.variance == doctest::Approx(30.0));
  CHECK(force_preset_names().size() == 6);
  CHECK_THROWS_AS(force_preset("huge", P), std::invalid_argument);
}

TEST_CASE("random force statistics") {
  Rng rng(5);
  CHECK(sample_random_force(ForceSpec{}, rng).isZero());

  const int n = 1000000;
  const auto reg = force_preset("regular_00", 6.0);
  const auto med = force_preset("medium", 6.0);
  double sx = 0, sy = 0, mx = 0, mx2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_random_force(reg, rng);
    sx += a.x();
    sy += a.y();
    const double b = sample_random_force(med, rng).x();
    mx += b;
    mx2 += b * b;
  }
  const double bound = 3.0 * std::sqrt(reg.variance / n);
  CHECK(std::abs(sx / n) < bound);
  CHECK(std::abs(sy / n) < bound);
  const double var = mx2 / n - (mx / n) * (mx / n);
  CHECK(std::abs(var / med.variance - 1.0) < 0.01);
}

TEST_CASE("spec validation") {
  UncertaintySpec u;
  CHECK_FALSE(u.any());
  u.noise = NoiseSpec{-0.1};
  CHECK_THROWS_AS(u.validate(), std::invalid_argument);
  u.noise.reset();
  u.failure = FailureSpec{1.5};
  CHECK_THROWS_AS(u.validate(), std::invalid_argument);
  u.failure.reset();
  u.force = ForceSpec{0, 0, -1, ""};
  CHECK_THROWS_AS(u.validate(), std::invalid_argument);
}

TEST_CASE("noise never reaches the true state") {
  UncertaintySpec u;
  u.noise = NoiseSpec{0.2};
  PerturbedEnv noisy(PhysicsParams{}, u, 7);
  PerturbedEnv clean(PhysicsParams{}, UncertaintySpec{}, 7);
  Rng ra(8), rb(8);
  noisy.reset(ra);
  clean.reset(rb);
  for (int i = 0; i < 50; ++i) {
    const auto a = noisy.step(Action::FireMain);
    const auto b = clean.step(Action::FireMain);
    CHECK(a.outcome.state == b.outcome.state);
    CHECK(a.observed.x != a.outcome.state.x);
    if (a.outcome.terminal) break;
  }
}

TEST_CASE("failure replaces the executed action") {
  UncertaintySpec u;
  u.failure = FailureSpec{1.0};
  PerturbedEnv env(PhysicsParams{}, u, 1);
  Rng rng(2);
  env.reset(rng);
  CHECK(env.step(Action::FireMain).executed == Action::Noop);
}

TEST_CASE("force acts as acceleration times dt") {
  PhysicsParams p;
  p.init_impulse = 0.0;
  p.spawn_height = 50.0;
  UncertaintySpec u;
  u.force = ForceSpec{2.0, 0.0, 0.0, "steady"};
  PerturbedEnv env(p, u, 1);
  Rng rng(2);
  env.reset(rng);
  const auto r = env.step(Action::Noop);
  CHECK(r.outcome.state.vx == doctest::Approx(2.0 * p.dt));
}

}  // TEST_SUITE
