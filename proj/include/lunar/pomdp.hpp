#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "lunar/discretization.hpp"
#include "lunar/episode.hpp"
#include "lunar/sarsa.hpp"
#include "lunar/uncertainty.hpp"

namespace lunar {

/// Probability weights over the uncertain cells, lowest code first. With y
/// included, cells are (x code, y code) pairs with y varying fastest.
using BeliefVector = Eigen::VectorXd;

/// Row a holds the utility of action a for each uncertain cell.
using AlphaVectorSet = Eigen::Matrix<double, kNumActions, Eigen::Dynamic, Eigen::RowMajor>;

/// Normal density N(center, sigma^2) at `obs`. Throws for sigma <= 0.
double gaussian_pdf(double obs, double center, double sigma);

/// Gaussian belief over one axis's codes given a noisy reading. Interior codes
/// get density times bin width at their centres; the two saturated edge codes
/// get the tail mass beyond their inner boundary. Computed in log space so that
/// tiny sigma degrades to a point belief instead of 0/0.
BeliefVector axis_belief(double obs, const AxisScheme& axis, double sigma);

/// axis_belief on the x axis.
BeliefVector belief_from_observation(double obs_x, const StateScheme& scheme, double sigma);

/// Product of the x belief and, when `include_y`, the y belief.
BeliefVector joint_belief(const LanderState& observed, const StateScheme& scheme, double sigma,
                          bool include_y);

/// alpha(a, cell) = Q(index with the cell's x (and y) code and the other codes
/// as observed, a). Cell order matches joint_belief.
AlphaVectorSet build_alpha_vectors(const QTable& q, const StateCodes& observed,
                                   bool include_y = false);

/// argmax_a alpha_a . belief, ties to the lowest action index.
Action select_action(const AlphaVectorSet& alphas, const BeliefVector& belief);

/// Phi(-x_true / sigma): chance that N(x_true, sigma^2) lands on the other side of 0.
double flip_probability(double x_true, double sigma);

/// Belief-weighted greedy agent on a table trained without observation noise.
/// `include_y` should match whether the observation noise touches y.
class PomdpAgent {
 public:
  PomdpAgent(const QTable& q, double sigma, bool include_y = false)
      : q_(q), sigma_(sigma), include_y_(include_y) {}
  Action act(const LanderState& observed) const;

 private:
  const QTable& q_;
  double sigma_;
  bool include_y_;
};

RewardLog evaluate_pomdp(const QTable& q, double belief_sigma, bool include_y,
                         const PhysicsParams& physics, const UncertaintySpec& wrappers,
                         int episodes, std::uint64_t seed, const EpisodeCallback& on_episode = {});

}  // namespace lunar
