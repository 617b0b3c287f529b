#include "lunar/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lunar/rollout.hpp"

namespace lunar {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(t);
  } else {
    storage_[head_] = t;
  }
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return storage_[(oldest + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, Rng& rng, bool allow_underfilled) const {
  if (size_ == 0 || (!allow_underfilled && size_ < k)) {
    throw std::logic_error("replay sample of " + std::to_string(k) + " from buffer of size " +
                           std::to_string(size_));
  }
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(storage_[rng.below(size_)]);
  return out;
}

void DqnConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "dqn.gamma must be in [0, 1]");
  require(lr > 0.0, "dqn.lr must be > 0");
  require(batch_size >= 1, "dqn.batch_size must be >= 1");
  require(epsilon_decay > 0.0 && epsilon_decay < 1.0, "dqn.epsilon_decay must be in (0, 1)");
  require(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0,
          "dqn epsilon bounds must satisfy 0 <= min <= start <= 1");
  require(capacity >= static_cast<std::size_t>(batch_size), "dqn.capacity must be >= batch_size");
  require(target_sync_interval >= 1, "dqn.target_sync must be >= 1");
  require(episodes >= 0, "episodes must be >= 0");
  require(hidden_width >= 1, "dqn.hidden_width must be >= 1");
}

double epsilon_after(int episode, const DqnConfig& cfg) {
  return std::max(cfg.epsilon_min, cfg.epsilon_start * std::pow(cfg.epsilon_decay, episode));
}

Action greedy_action(const QNetwork& net, const Observation& obs) {
  const Eigen::VectorXd q = net.forward(obs);
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q(a) > q(best)) best = a;
  }
  return action_from_index(static_cast<int>(best));
}

namespace {

Eigen::MatrixXd stack(std::span<const Transition> batch, bool next) {
  Eigen::MatrixXd x(8, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = next ? batch[i].next_state : batch[i].state;
  }
  return x;
}

}  // namespace

Eigen::VectorXd compute_targets(std::span<const Transition> batch, const QNetwork& target,
                                double gamma) {
  if (batch.empty()) throw std::invalid_argument("compute_targets on an empty batch");
  const Eigen::MatrixXd next_q = target.forward(stack(batch, true));
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    y(col) = batch[i].terminal ? batch[i].reward
                               : batch[i].reward + gamma * next_q.col(col).maxCoeff();
  }
  return y;
}

void Optimizer::apply(QNetwork& net, const GradientSet<double>& grads, double lr) {
  if (kind_ == OptimizerKind::Adam) {
    adam_.apply(net, grads, lr);
  } else {
    sgd_apply(net, grads, lr);
  }
}

double train_on_batch(QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                      const DqnConfig& cfg, Optimizer& optimizer) {
  const Eigen::VectorXd y = compute_targets(batch, target, cfg.gamma);
  std::vector<int> actions(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) actions[i] = to_index(batch[i].action);
  auto result = backward(online, stack(batch, false), std::span<const int>(actions), y);
  optimizer.apply(online, result.grads, cfg.lr);
  return result.loss;
}

double train_step(QNetwork& online, const QNetwork& target, const ReplayBuffer& buffer,
                  const DqnConfig& cfg, Optimizer& optimizer, Rng& rng) {
  const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), rng);
  return train_on_batch(online, target, batch, cfg, optimizer);
}

void sync_target(const QNetwork& online, QNetwork& target) {
  if (!online.same_shape(target)) {
    throw std::invalid_argument("sync_target: online and target architectures differ");
  }
  target = online;
}

DqnRun train_dqn(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                 const DqnConfig& cfg, std::uint64_t seed, const QNetwork* initial,
                 const EpisodeCallback& on_episode) {
  cfg.validate();
  const auto seeds = SeedStreams::from(seed);
  Rng env_rng(seeds.env);
  Rng agent_rng(seeds.agent);
  PerturbedEnv env(physics, wrappers, seeds.uncertainty);

  DqnRun run;
  run.net = initial ? *initial : QNetwork::init(cfg.layer_dims(), agent_rng());
  if (run.net.input_size() != 8 || run.net.output_size() != kNumActions) {
    throw std::invalid_argument("dqn network must map 8 inputs to 4 outputs");
  }
  QNetwork target = run.net;
  Optimizer optimizer(run.net, cfg.optimizer);
  ReplayBuffer buffer(cfg.capacity);
  long long env_steps = 0;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double eps = epsilon_after(ep, cfg);
    Observation obs = env.reset(env_rng).vector();
    EpisodeStats stats;
    stats.epsilon = eps;
    double loss_sum = 0.0;
    int updates = 0;
    while (true) {
      Action a;
      if (agent_rng.uniform() < eps) {
        a = static_cast<Action>(agent_rng.below(kNumActions));
      } else {
        a = greedy_action(run.net, obs);
      }
      const auto step = env.step(a);
      const Observation next = step.observed.vector();
      buffer.push({obs, a, step.outcome.reward, next, step.outcome.terminal});
      ++env_steps;
      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        loss_sum += train_step(run.net, target, buffer, cfg, optimizer, agent_rng);
        ++updates;
      }
      if (env_steps % cfg.target_sync_interval == 0) sync_target(run.net, target);

      stats.reward += step.outcome.reward;
      ++stats.steps;
      if (step.outcome.terminal) {
        stats.verdict = step.outcome.verdict;
        break;
      }
      obs = next;
    }
    run.log.push_back(stats);
    run.losses.push_back(updates ? loss_sum / updates : 0.0);
    if (on_episode) on_episode(ep, stats);
  }
  return run;
}

RewardLog evaluate_dqn(const QNetwork& net, const PhysicsParams& physics,
                       const UncertaintySpec& wrappers, int episodes, std::uint64_t seed,
                       const EpisodeCallback& on_episode) {
  return run_policy(
      physics, wrappers, episodes, seed,
      [&](const LanderState& obs, Rng&) { return greedy_action(net, obs.vector()); }, on_episode);
}

}  // namespace lunar
