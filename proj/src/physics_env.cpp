#include "lunar/physics_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lunar {

Action action_from_index(int i) {
  if (i < 0 || i >= kNumActions) {
    throw std::out_of_range("action index " + std::to_string(i) + " outside [0, 4)");
  }
  return static_cast<Action>(i);
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Noop: return "noop";
    case Action::FireLeft: return "fire_left";
    case Action::FireMain: return "fire_main";
    case Action::FireRight: return "fire_right";
  }
  return "?";
}

Observation LanderState::vector() const {
  Observation o;
  o << x, y, vx, vy, theta, omega, left_contact ? 1.0 : 0.0, right_contact ? 1.0 : 0.0;
  return o;
}

double LanderState::speed() const { return std::hypot(vx, vy); }

double LanderState::distance_to_pad() const { return std::hypot(x, y); }

std::ostream& operator<<(std::ostream& os, const LanderState& s) {
  return os << "LanderState{x=" << s.x << " y=" << s.y << " vx=" << s.vx << " vy=" << s.vy
            << " theta=" << s.theta << " omega=" << s.omega << " left=" << s.left_contact
            << " right=" << s.right_contact << "}";
}

void PhysicsParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("physics: ") + what);
  };
  require(dt > 0.0, "dt must be > 0");
  require(gravity > 0.0, "gravity must be > 0");
  require(side_engine_power > 0.0, "side_engine_power must be > 0");
  require(main_engine_power > side_engine_power,
          "main_engine_power must exceed side_engine_power");
  require(pad_half_width > 0.0, "pad_half_width must be > 0");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(settle_steps >= 1, "settle_steps must be >= 1");
  require(init_impulse >= 0.0, "init_impulse must be >= 0");
  require(leg_spread > 0.0, "leg_spread must be > 0");
  require(crash_speed >= landing_speed_limit, "crash_speed must be >= landing_speed_limit");
  require(contact_tolerance >= 0.0, "contact_tolerance must be >= 0");
  require(ground_friction >= 0.0 && ground_friction <= 1.0, "ground_friction must be in [0, 1]");
  require(ground_settle_rate >= 0.0 && ground_settle_rate <= 1.0,
          "ground_settle_rate must be in [0, 1]");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Flying: return "flying";
    case Verdict::Landed: return "landed";
    case Verdict::Crashed: return "crashed";
    case Verdict::OutOfBounds: return "out_of_bounds";
    case Verdict::Timeout: return "timeout";
  }
  return "?";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  for (auto v : {Verdict::Flying, Verdict::Landed, Verdict::Crashed, Verdict::OutOfBounds,
                 Verdict::Timeout}) {
    if (verdict_name(v) == name) return v;
  }
  return std::nullopt;
}

RewardBreakdown make_reward(double d_delta, double v_delta, double omega_delta,
                            double landed_bonus) {
  RewardBreakdown r;
  r.d_delta = d_delta;
  r.v_delta = v_delta;
  r.omega_delta = omega_delta;
  r.landed_bonus = landed_bonus;
  r.total = -100.0 * d_delta - 100.0 * v_delta - 100.0 * omega_delta + landed_bonus;
  return r;
}

double has_landed(const LanderState& state, Verdict verdict) {
  double bonus = 0.0;
  if (state.left_contact) bonus += 10.0;
  if (state.right_contact) bonus += 10.0;
  if (verdict == Verdict::Landed) bonus += 100.0;
  if (verdict == Verdict::Crashed) bonus -= 100.0;
  return bonus;
}

bool landing_conditions(const LanderState& s, const PhysicsParams& p) {
  return s.left_contact && s.right_contact && std::abs(s.x) <= p.pad_half_width &&
         s.speed() <= p.landing_speed_limit && std::abs(s.theta) <= p.tilt_limit;
}

namespace {

bool touchdown_violation(const LanderState& s, const PhysicsParams& p) {
  return (s.left_contact || s.right_contact) &&
         (s.speed() > p.crash_speed || std::abs(s.theta) > p.tilt_limit ||
          std::abs(s.x) > p.pad_half_width);
}

// Leg tips sit at body-frame (-leg_spread, 0) and (+leg_spread, 0).
std::pair<double, double> foot_heights(const LanderState& s, const PhysicsParams& p) {
  const double lift = p.leg_spread * std::sin(s.theta);
  return {s.y - lift, s.y + lift};
}

void update_contacts(LanderState& s, const PhysicsParams& p) {
  const auto [left, right] = foot_heights(s, p);
  s.left_contact = left <= p.contact_tolerance;
  s.right_contact = right <= p.contact_tolerance;
}

}  // namespace

Verdict classify(const LanderState& state, const PhysicsParams& params, int steps_elapsed,
                 int settled_steps) {
  if (touchdown_violation(state, params)) return Verdict::Crashed;
  if (std::abs(state.x) > params.bounds_x) return Verdict::OutOfBounds;
  if (settled_steps >= params.settle_steps && landing_conditions(state, params)) {
    return Verdict::Landed;
  }
  if (steps_elapsed >= params.max_steps) return Verdict::Timeout;
  return Verdict::Flying;
}

Eigen::Vector2d engine_acceleration(const LanderState& state, Action action,
                                    const PhysicsParams& params) {
  const Eigen::Rotation2Dd to_world(state.theta);
  Eigen::Vector2d body = Eigen::Vector2d::Zero();
  switch (action) {
    case Action::Noop: break;
    case Action::FireMain: body.y() = params.main_engine_power; break;
    case Action::FireLeft: body.x() = params.side_engine_power; break;
    case Action::FireRight: body.x() = -params.side_engine_power; break;
  }
  return to_world * body;
}

LanderEnv::LanderEnv(PhysicsParams params) : params_(params) { params_.validate(); }

LanderState LanderEnv::reset(Rng& rng) {
  LanderState s;
  s.x = 0.0;
  s.y = params_.spawn_height;
  s.vx = rng.uniform(-params_.init_impulse, params_.init_impulse);
  s.vy = rng.uniform(-params_.init_impulse, params_.init_impulse);
  update_contacts(s, params_);
  reset_to(s);
  return state_;
}

void LanderEnv::reset_to(const LanderState& state) {
  state_ = state;
  steps_ = 0;
  settled_ = 0;
  done_ = false;
  remember_shaping_terms();
}

void LanderEnv::remember_shaping_terms() {
  prev_d_ = state_.distance_to_pad();
  prev_v_ = state_.speed();
  prev_omega_ = std::abs(state_.omega);
}

StepOutcome LanderEnv::step(Action action, const Eigen::Vector2d& external_accel) {
  if (done_) throw std::logic_error("step() called on a terminal episode; call reset() first");

  LanderState& s = state_;
  const Eigen::Vector2d accel = engine_acceleration(s, action, params_) +
                                Eigen::Vector2d(0.0, -params_.gravity) + external_accel;
  double angular = 0.0;
  if (action == Action::FireLeft) angular = params_.side_engine_torque;
  if (action == Action::FireRight) angular = -params_.side_engine_torque;

  // Semi-implicit Euler: velocities first, then positions.
  s.vx += accel.x() * params_.dt;
  s.vy += accel.y() * params_.dt;
  s.omega += angular * params_.dt;
  s.x += s.vx * params_.dt;
  s.y += s.vy * params_.dt;
  s.theta += s.omega * params_.dt;
  ++steps_;

  update_contacts(s, params_);
  const bool crashed = touchdown_violation(s, params_);
  if (!crashed) {
    const auto [left, right] = foot_heights(s, params_);
    const double lowest = std::min(left, right);
    if (lowest <= 0.0) {
      s.y -= lowest;
      s.vy = std::max(s.vy, 0.0);
      s.vx *= 1.0 - params_.ground_friction;
      s.omega = 0.0;
      s.theta *= 1.0 - params_.ground_settle_rate;
      update_contacts(s, params_);
    }
  }

  settled_ = landing_conditions(s, params_) ? settled_ + 1 : 0;

  StepOutcome out;
  out.verdict = crashed ? Verdict::Crashed : classify(s, params_, steps_, settled_);
  out.terminal = out.verdict != Verdict::Flying;

  const double d = s.distance_to_pad();
  const double v = s.speed();
  const double w = std::abs(s.omega);
  out.breakdown = make_reward(d - prev_d_, v - prev_v_, w - prev_omega_, has_landed(s, out.verdict));
  out.reward = out.breakdown.total;
  out.state = s;
  prev_d_ = d;
  prev_v_ = v;
  prev_omega_ = w;
  done_ = out.terminal;
  return out;
}

}  // namespace lunar
