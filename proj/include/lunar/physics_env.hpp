#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>

#include "lunar/rng.hpp"

namespace lunar {

enum class Action : std::uint8_t { Noop = 0, FireLeft = 1, FireMain = 2, FireRight = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Noop, Action::FireLeft, Action::FireMain, Action::FireRight};

constexpr int to_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int i);
std::string_view action_name(Action a);

/// Agent-facing state vector: x, y, vx, vy, theta, omega, left, right.
using Observation = Eigen::Matrix<double, 8, 1>;

struct LanderState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double theta = 0.0;
  double omega = 0.0;
  bool left_contact = false;
  bool right_contact = false;

  Observation vector() const;
  double speed() const;
  double distance_to_pad() const;

  bool operator==(const LanderState&) const = default;
};

std::ostream& operator<<(std::ostream& os, const LanderState& s);

struct PhysicsParams {
  double dt = 0.02;
  double gravity = 1.62;
  double main_engine_power = 6.0;
  double side_engine_power = 0.6;
  double side_engine_torque = 0.8;
  double pad_half_width = 0.2;
  int max_steps = 1000;
  double spawn_height = 1.4;
  double landing_speed_limit = 0.1;
  double tilt_limit = 0.4;
  double bounds_x = 1.0;
  double init_impulse = 0.5;
  int settle_steps = 15;
  // Touchdown geometry and contact response.
  double leg_spread = 0.1;
  double crash_speed = 0.5;
  double contact_tolerance = 0.01;
  double ground_friction = 0.3;
  double ground_settle_rate = 0.3;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

enum class Verdict : std::uint8_t { Flying, Landed, Crashed, OutOfBounds, Timeout };

std::string_view verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct RewardBreakdown {
  double d_delta = 0.0;
  double v_delta = 0.0;
  double omega_delta = 0.0;
  double landed_bonus = 0.0;
  double total = 0.0;
};

/// -100 d_delta - 100 v_delta - 100 omega_delta + landed_bonus.
RewardBreakdown make_reward(double d_delta, double v_delta, double omega_delta,
                            double landed_bonus);

struct StepOutcome {
  LanderState state;
  double reward = 0.0;
  RewardBreakdown breakdown;
  bool terminal = false;
  Verdict verdict = Verdict::Flying;
};

/// +10 per leg in contact, +100 on Landed, -100 on Crashed.
double has_landed(const LanderState& state, Verdict verdict);

/// Terminal classification. `settled_steps` counts consecutive steps (this one
/// included) on which the soft-landing conditions held.
Verdict classify(const LanderState& state, const PhysicsParams& params, int steps_elapsed,
                 int settled_steps);

/// Whether the soft-landing conditions hold for a single instant.
bool landing_conditions(const LanderState& state, const PhysicsParams& params);

/// Body-frame engine acceleration for `action`, rotated into the world frame.
Eigen::Vector2d engine_acceleration(const LanderState& state, Action action,
                                    const PhysicsParams& params);

/// Episodic lander simulator. Single-threaded mutable state; instances share
/// nothing and can be moved between threads.
class LanderEnv {
 public:
  explicit LanderEnv(PhysicsParams params = {});

  const PhysicsParams& params() const { return params_; }
  const LanderState& state() const { return state_; }
  int steps_elapsed() const { return steps_; }
  bool done() const { return done_; }

  /// Starts an episode from the spawn point with a uniformly drawn initial
  /// velocity impulse in [-init_impulse, init_impulse] per axis.
  LanderState reset(Rng& rng);

  /// Starts an episode from an explicit state (tests, replays).
  void reset_to(const LanderState& state);

  /// Advances one step. `external_accel` is an additional world-frame
  /// acceleration applied for this step (random-force perturbation).
  /// Throws std::logic_error when the episode is already terminal.
  StepOutcome step(Action action, const Eigen::Vector2d& external_accel = Eigen::Vector2d::Zero());

 private:
  void remember_shaping_terms();

  PhysicsParams params_;
  LanderState state_;
  int steps_ = 0;
  int settled_ = 0;
  bool done_ = true;
  double prev_d_ = 0.0;
  double prev_v_ = 0.0;
  double prev_omega_ = 0.0;
};

}  // namespace lunar
