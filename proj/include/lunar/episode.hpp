#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lunar/physics_env.hpp"

namespace lunar {

struct EpisodeStats {
  double reward = 0.0;
  int steps = 0;
  Verdict verdict = Verdict::Flying;
  double epsilon = 0.0;
};

using RewardLog = std::vector<EpisodeStats>;

/// Optional progress hook, called after each finished episode.
using EpisodeCallback = std::function<void(int episode, const EpisodeStats&)>;

/// Random-stream layout derived from one experiment seed.
struct SeedStreams {
  std::uint64_t env;
  std::uint64_t agent;
  std::uint64_t uncertainty;

  static SeedStreams from(std::uint64_t seed) { return {seed, seed + 1, seed + 2}; }
};

}  // namespace lunar
