#include "lunar/pomdp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lunar/rollout.hpp"

namespace lunar {

double gaussian_pdf(double obs, double center, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_pdf: sigma must be > 0");
  const double z = (obs - center) / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

namespace {

// log Phi(z) for the standard normal CDF, accurate far into the lower tail.
double log_normal_cdf(double z) {
  if (z > -20.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

}  // namespace

BeliefVector axis_belief(double obs, const AxisScheme& axis, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("belief: sigma must be > 0");
  const int n = axis.count();
  BeliefVector log_w(n);
  if (n == 1) return BeliefVector::Ones(1);

  const double log_norm = std::log(axis.step) - std::log(std::sqrt(2.0 * std::numbers::pi) * sigma);
  for (int i = 0; i < n; ++i) {
    const int code = axis.min_code + i;
    if (i == 0) {
      log_w(i) = log_normal_cdf(((code + 0.5) * axis.step - obs) / sigma);
    } else if (i == n - 1) {
      log_w(i) = log_normal_cdf((obs - (code - 0.5) * axis.step) / sigma);
    } else {
      const double z = (obs - code * axis.step) / sigma;
      log_w(i) = log_norm - 0.5 * z * z;
    }
  }
  const double top = log_w.maxCoeff();
  BeliefVector w = (log_w.array() - top).exp().matrix();
  return w / w.sum();
}

BeliefVector belief_from_observation(double obs_x, const StateScheme& scheme, double sigma) {
  return axis_belief(obs_x, scheme.axes[kX], sigma);
}

BeliefVector joint_belief(const LanderState& observed, const StateScheme& scheme, double sigma,
                          bool include_y) {
  const BeliefVector bx = axis_belief(observed.x, scheme.axes[kX], sigma);
  if (!include_y) return bx;
  const BeliefVector by = axis_belief(observed.y, scheme.axes[kY], sigma);
  BeliefVector b(bx.size() * by.size());
  for (Eigen::Index i = 0; i < bx.size(); ++i) b.segment(i * by.size(), by.size()) = bx(i) * by;
  return b;
}

AlphaVectorSet build_alpha_vectors(const QTable& q, const StateCodes& observed, bool include_y) {
  const AxisScheme& ax = q.scheme.axes[kX];
  const AxisScheme& ay = q.scheme.axes[kY];
  const int ny = include_y ? ay.count() : 1;
  AlphaVectorSet alphas(kNumActions, ax.count() * ny);
  StateCodes codes = observed;
  for (int i = 0; i < ax.count(); ++i) {
    codes.axes[kX] = ax.min_code + i;
    for (int j = 0; j < ny; ++j) {
      if (include_y) codes.axes[kY] = ay.min_code + j;
      const auto s = static_cast<Eigen::Index>(encode(codes, q.scheme));
      alphas.col(i * ny + j) = q.values.row(s).transpose();
    }
  }
  return alphas;
}

Action select_action(const AlphaVectorSet& alphas, const BeliefVector& belief) {
  if (alphas.cols() != belief.size()) {
    throw std::invalid_argument("alpha vectors and belief have different lengths");
  }
  const Eigen::Matrix<double, kNumActions, 1> utility = alphas * belief;
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (utility(a) > utility(best)) best = a;
  }
  return static_cast<Action>(best);
}

double flip_probability(double x_true, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("flip_probability: sigma must be > 0");
  return 0.5 * std::erfc(x_true / (sigma * std::numbers::sqrt2));
}

Action PomdpAgent::act(const LanderState& observed) const {
  const StateCodes codes = discretize(observed, q_.scheme);
  return select_action(build_alpha_vectors(q_, codes, include_y_),
                       joint_belief(observed, q_.scheme, sigma_, include_y_));
}

RewardLog evaluate_pomdp(const QTable& q, double belief_sigma, bool include_y,
                         const PhysicsParams& physics, const UncertaintySpec& wrappers,
                         int episodes, std::uint64_t seed, const EpisodeCallback& on_episode) {
  const PomdpAgent agent(q, belief_sigma, include_y);
  return run_policy(
      physics, wrappers, episodes, seed,
      [&](const LanderState& obs, Rng&) { return agent.act(obs); }, on_episode);
}

}  // namespace lunar
