#pragma once

#include <algorithm>
#include <cstdint>

#include "lunar/episode.hpp"
#include "lunar/rng.hpp"
#include "lunar/uncertainty.hpp"

namespace lunar {

/// Runs `episodes` episodes of a fixed policy without learning.
/// `policy(observed_state, agent_rng) -> Action`.
template <typename Policy>
RewardLog run_policy(const PhysicsParams& physics, const UncertaintySpec& wrappers, int episodes,
                     std::uint64_t seed, Policy&& policy, const EpisodeCallback& on_episode = {},
                     double epsilon = 0.0) {
  const auto seeds = SeedStreams::from(seed);
  Rng env_rng(seeds.env);
  Rng agent_rng(seeds.agent);
  PerturbedEnv env(physics, wrappers, seeds.uncertainty);
  RewardLog log;
  log.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int ep = 0; ep < episodes; ++ep) {
    LanderState obs = env.reset(env_rng);
    EpisodeStats stats;
    stats.epsilon = epsilon;
    while (true) {
      const auto step = env.step(policy(obs, agent_rng));
      stats.reward += step.outcome.reward;
      ++stats.steps;
      if (step.outcome.terminal) {
        stats.verdict = step.outcome.verdict;
        break;
      }
      obs = step.observed;
    }
    log.push_back(stats);
    if (on_episode) on_episode(ep, stats);
  }
  return log;
}

}  // namespace lunar
