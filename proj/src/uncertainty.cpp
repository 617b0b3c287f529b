#include "lunar/uncertainty.hpp"

#include <cmath>
#include <stdexcept>

namespace lunar {

void UncertaintySpec::validate() const {
  if (noise && !(noise->sigma >= 0.0)) throw std::invalid_argument("noise.sigma must be >= 0");
  if (failure && !(failure->failure_prob >= 0.0 && failure->failure_prob <= 1.0)) {
    throw std::invalid_argument("failure.prob must be in [0, 1]");
  }
  if (force && !(force->variance >= 0.0)) {
    throw std::invalid_argument("force variance must be >= 0");
  }
}

LanderState apply_obs_noise(const LanderState& state, const NoiseSpec& spec, Rng& rng) {
  LanderState out = state;
  if (spec.sigma == 0.0) return out;
  out.x += rng.normal(0.0, spec.sigma);
  if (spec.noise_y) out.y += rng.normal(0.0, spec.sigma);
  return out;
}

Action apply_engine_failure(Action action, const FailureSpec& spec, Rng& rng) {
  if (action == Action::Noop) return action;
  return rng.bernoulli(spec.failure_prob) ? Action::Noop : action;
}

Eigen::Vector2d sample_random_force(const ForceSpec& spec, Rng& rng) {
  const double sd = std::sqrt(spec.variance);
  const double fx = rng.normal(spec.mean_x, sd);
  const double fy = rng.normal(spec.mean_y, sd);
  return {fx, fy};
}

const std::vector<std::string>& force_preset_names() {
  static const std::vector<std::string> names = {"regular_00", "regular_01", "regular_10",
                                                 "regular_11", "medium",     "large"};
  return names;
}

ForceSpec force_preset(std::string_view name, double engine_power) {
  const double p = engine_power;
  ForceSpec f;
  f.name = std::string(name);
  if (name == "regular_00") {
    f.variance = p / 3.0;
  } else if (name == "regular_01") {
    f.mean_y = p / 6.0;
    f.variance = p / 3.0;
  } else if (name == "regular_10") {
    f.mean_x = p / 6.0;
    f.variance = p / 3.0;
  } else if (name == "regular_11") {
    f.mean_x = p / 6.0;
    f.mean_y = p / 6.0;
    f.variance = p / 3.0;
  } else if (name == "medium") {
    f.mean_x = p;
    f.mean_y = p;
    f.variance = 3.0 * p;
  } else if (name == "large") {
    f.mean_x = 2.0 * p;
    f.mean_y = 2.0 * p;
    f.variance = 5.0 * p;
  } else {
    throw std::invalid_argument("unknown force preset '" + std::string(name) + "'");
  }
  return f;
}

PerturbedEnv::PerturbedEnv(PhysicsParams params, UncertaintySpec spec,
                           std::uint64_t uncertainty_seed)
    : env_(params), spec_(std::move(spec)), rng_(uncertainty_seed) {
  spec_.validate();
}

LanderState PerturbedEnv::observe(const LanderState& truth) {
  return spec_.noise ? apply_obs_noise(truth, *spec_.noise, rng_) : truth;
}

LanderState PerturbedEnv::reset(Rng& env_rng) { return observe(env_.reset(env_rng)); }

PerturbedEnv::Result PerturbedEnv::step(Action chosen) {
  Result r;
  r.executed = spec_.failure ? apply_engine_failure(chosen, *spec_.failure, rng_) : chosen;
  const Eigen::Vector2d force =
      spec_.force ? sample_random_force(*spec_.force, rng_) : Eigen::Vector2d::Zero();
  r.outcome = env_.step(r.executed, force);
  r.observed = observe(r.outcome.state);
  return r;
}

}  // namespace lunar
