#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "lunar/episode.hpp"
#include "lunar/mlp.hpp"
#include "lunar/physics_env.hpp"
#include "lunar/rng.hpp"
#include "lunar/uncertainty.hpp"

namespace lunar {

using QNetwork = Mlp<double>;

struct Transition {
  Observation state = Observation::Zero();
  Action action = Action::Noop;
  double reward = 0.0;
  Observation next_state = Observation::Zero();
  bool terminal = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);

  /// `k` uniform draws with replacement. Throws std::logic_error when fewer
  /// than `k` transitions are stored unless `allow_underfilled` is set.
  std::vector<Transition> sample(std::size_t k, Rng& rng, bool allow_underfilled = false) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  /// i-th stored transition counting from the oldest.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

enum class OptimizerKind { Adam, Sgd };

struct DqnConfig {
  double gamma = 0.99;
  double lr = 0.001;
  int batch_size = 64;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.996;
  double epsilon_min = 0.01;
  std::size_t capacity = 100000;
  int target_sync_interval = 1000;
  int episodes = 600;
  int hidden_width = 128;
  OptimizerKind optimizer = OptimizerKind::Adam;

  void validate() const;
  std::vector<int> layer_dims() const { return {8, hidden_width, hidden_width, kNumActions}; }
};

/// max(epsilon_min, epsilon_start * epsilon_decay^episode).
double epsilon_after(int episode, const DqnConfig& cfg);

/// Argmax over the network's outputs, ties to the lowest action index.
Action greedy_action(const QNetwork& net, const Observation& obs);

/// y = r for terminal transitions, r + gamma max_a' Q_target(s', a') otherwise.
Eigen::VectorXd compute_targets(std::span<const Transition> batch, const QNetwork& target,
                                double gamma);

/// Optimizer state for whichever update rule the config selects.
class Optimizer {
 public:
  Optimizer(const QNetwork& net, OptimizerKind kind) : kind_(kind), adam_(net) {}
  void apply(QNetwork& net, const GradientSet<double>& grads, double lr);
  const Adam<double>& adam() const { return adam_; }

 private:
  OptimizerKind kind_;
  Adam<double> adam_;
};

/// One minibatch step of the online network against the frozen target.
/// Returns the minibatch loss before the update.
double train_step(QNetwork& online, const QNetwork& target, const ReplayBuffer& buffer,
                  const DqnConfig& cfg, Optimizer& optimizer, Rng& rng);

/// Same as train_step with an explicit batch.
double train_on_batch(QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                      const DqnConfig& cfg, Optimizer& optimizer);

/// target <- online. Throws std::invalid_argument on architecture mismatch.
void sync_target(const QNetwork& online, QNetwork& target);

struct DqnRun {
  QNetwork net;
  RewardLog log;
  std::vector<double> losses;  // mean loss per episode (0 before training starts)
};

DqnRun train_dqn(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                 const DqnConfig& cfg, std::uint64_t seed, const QNetwork* initial = nullptr,
                 const EpisodeCallback& on_episode = {});

RewardLog evaluate_dqn(const QNetwork& net, const PhysicsParams& physics,
                       const UncertaintySpec& wrappers, int episodes, std::uint64_t seed,
                       const EpisodeCallback& on_episode = {});

}  // namespace lunar
