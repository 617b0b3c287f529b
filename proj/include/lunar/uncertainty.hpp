#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lunar/physics_env.hpp"
#include "lunar/rng.hpp"

namespace lunar {

struct NoiseSpec {
  double sigma = 0.0;
  /// Positional noise on y as well as x.
  bool noise_y = true;
};

struct FailureSpec {
  double failure_prob = 0.0;
};

struct ForceSpec {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double variance = 0.0;
  std::string name;
};

/// Which perturbations are active. Composition order per step: failure on the
/// chosen action, force inside the physics step, noise on the emitted
/// observation.
struct UncertaintySpec {
  std::optional<NoiseSpec> noise;
  std::optional<FailureSpec> failure;
  std::optional<ForceSpec> force;

  void validate() const;
  bool any() const { return noise || failure || force; }
};

LanderState apply_obs_noise(const LanderState& state, const NoiseSpec& spec, Rng& rng);

Action apply_engine_failure(Action action, const FailureSpec& spec, Rng& rng);

/// Per-axis Gaussian draw; `variance` is a variance, not a standard deviation.
Eigen::Vector2d sample_random_force(const ForceSpec& spec, Rng& rng);

/// Named presets scaled by engine power P: regular_00/01/10/11 (means 0 or P/6,
/// variance P/3), medium (mean P, variance 3P), large (mean 2P, variance 5P).
ForceSpec force_preset(std::string_view name, double engine_power);

const std::vector<std::string>& force_preset_names();

/// Simulator plus perturbation layer. Owns its own random stream for the
/// perturbations; the environment stream is passed to reset().
class PerturbedEnv {
 public:
  PerturbedEnv(PhysicsParams params, UncertaintySpec spec, std::uint64_t uncertainty_seed);

  /// Returns the observation the agent sees.
  LanderState reset(Rng& env_rng);

  struct Result {
    StepOutcome outcome;  // true state, reward and verdict
    LanderState observed;
    Action executed = Action::Noop;
  };

  Result step(Action chosen);

  const LanderEnv& env() const { return env_; }
  const UncertaintySpec& spec() const { return spec_; }

 private:
  LanderState observe(const LanderState& truth);

  LanderEnv env_;
  UncertaintySpec spec_;
  Rng rng_;
};

}  // namespace lunar
