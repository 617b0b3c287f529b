#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lunar/discretization.hpp"
#include "lunar/episode.hpp"
#include "lunar/rng.hpp"
#include "lunar/uncertainty.hpp"

namespace lunar {

using QValues = Eigen::Matrix<double, Eigen::Dynamic, kNumActions, Eigen::RowMajor>;
using VisitCounts = Eigen::Matrix<std::uint32_t, Eigen::Dynamic, kNumActions, Eigen::RowMajor>;

struct QTable {
  StateScheme scheme;
  QValues values;
  VisitCounts visits;

  QTable(StateScheme scheme, double q_init = 0.0);

  std::size_t state_count() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t s, Action a) const { return values(s, to_index(a)); }
  double& operator()(std::size_t s, Action a) { return values(s, to_index(a)); }
};

struct EpsilonStage {
  int start_episode = 0;
  int end_episode = 0;  // exclusive
  double epsilon = 0.0;
};

using EpsilonSchedule = std::vector<EpsilonStage>;

/// 0.5 / 0.2 / 0.1 / 0.01 / 0 over [0,100) [100,500) [500,2500) [2500,7500) [7500,10000).
EpsilonSchedule staged_schedule();

/// The staged schedule with every boundary scaled by episodes / 10000.
EpsilonSchedule compressed_schedule(int episodes);

double epsilon_for_episode(int episode, const EpsilonSchedule& schedule);

struct SarsaConfig {
  StateScheme scheme = named_scheme("5X4Y");
  double alpha = 0.5;
  double gamma = 1.0;
  EpsilonSchedule schedule = staged_schedule();
  int episodes = 10000;
  double q_init = 0.0;

  void validate() const;
};

/// Argmax with ties to the lowest action index.
Action greedy_action(const QTable& q, std::size_t s);

/// Epsilon-greedy. With probability epsilon a uniformly random action.
Action select_action(const QTable& q, std::size_t s, double epsilon, Rng& rng);

/// Q(s,a) += alpha (r + gamma Q(s',a') [not terminal] - Q(s,a)).
void sarsa_update(QTable& q, std::size_t s, Action a, double r, std::size_t s_next, Action a_next,
                  bool terminal, const SarsaConfig& cfg);

struct SarsaRun {
  QTable table;
  RewardLog log;
};

/// Trains from a fresh table (or continues `initial` when given).
SarsaRun train_sarsa(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                     const SarsaConfig& cfg, std::uint64_t seed, const QTable* initial = nullptr,
                     const EpisodeCallback& on_episode = {});

/// Greedy rollouts with a frozen table.
RewardLog evaluate_sarsa(const QTable& q, const PhysicsParams& physics,
                         const UncertaintySpec& wrappers, int episodes, std::uint64_t seed,
                         const EpisodeCallback& on_episode = {});

/// Uniform random policy; the baseline every agent is compared with.
RewardLog run_random_agent(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                           int episodes, std::uint64_t seed, const EpisodeCallback& on_episode = {});

/// Text format: "scheme=<name> actions=4 states=<N>" then "state action value"
/// for every nonzero cell.
void save_qtable(std::ostream& os, const QTable& q);
QTable load_qtable(std::istream& is);

}  // namespace lunar
