#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lunar/dqn.hpp"
#include "lunar/episode.hpp"
#include "lunar/physics_env.hpp"
#include "lunar/sarsa.hpp"
#include "lunar/uncertainty.hpp"

namespace lunar {

enum class AgentKind { Random, Sarsa, Dqn, Pomdp };
enum class RunMode { Train, Evaluate };

std::string_view agent_name(AgentKind a);
std::string_view mode_name(RunMode m);

/// Raised for a bad key or value. `key()` is the offending config key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  AgentKind agent = AgentKind::Random;
  RunMode mode = RunMode::Train;
  int episodes = 100;
  std::uint64_t seed = 1;
  std::string label;

  std::string scheme = "5X4Y";
  std::string schedule = "compressed";  // or "staged"
  SarsaConfig sarsa;
  DqnConfig dqn;
  UncertaintySpec uncertainty;
  /// Belief width for agent=pomdp; falls back to noise.sigma, then 0.05.
  double pomdp_sigma = 0.0;
  /// Whether the belief covers y; follows noise.y unless set.
  std::optional<bool> pomdp_belief_y;
  PhysicsParams physics;

  std::filesystem::path out;  // episode CSV
  std::filesystem::path q_table_in;
  std::filesystem::path q_table_out;
  std::filesystem::path weights_in;
  std::filesystem::path weights_out;

  /// Applies one key=value pair. Throws ConfigError naming the key.
  void set(std::string_view key, std::string_view value);

  /// Cross-field checks, including that input artifacts exist in evaluate mode.
  void validate() const;

  /// The Sarsa settings with scheme, schedule and episode count resolved.
  SarsaConfig resolved_sarsa() const;
  DqnConfig resolved_dqn() const;
  double belief_sigma() const;
  bool belief_covers_y() const;
  std::string display_label() const;
};

/// Every key accepted by ExperimentConfig::set, in documentation order.
const std::vector<std::string>& config_keys();

/// Flat key=value lines; '#' starts a comment. Applied on top of `base`.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

struct EpisodeRecord {
  int episode = 0;
  double reward = 0.0;
  double moving_avg_10 = 0.0;
  double epsilon = 0.0;
  int steps = 0;
  Verdict verdict = Verdict::Flying;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Element k is the mean of values[max(0, k - window + 1) ..= k].
std::vector<double> moving_average(std::span<const double> values, int window = 10);

std::vector<EpisodeRecord> to_records(const RewardLog& log);

inline constexpr std::string_view kCsvHeader = "episode,reward,moving_avg_10,epsilon,steps,verdict";

void write_csv(std::ostream& os, std::span<const EpisodeRecord> records);
/// Throws ParseError carrying the 1-based line number (the header is line 1).
std::vector<EpisodeRecord> parse_csv(std::istream& is);

void write_csv_file(const std::filesystem::path& path, std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_csv_file(const std::filesystem::path& path);

struct RunResult {
  std::vector<EpisodeRecord> records;
  std::vector<std::filesystem::path> artifacts;  // files written, CSV first
};

/// Wires environment, wrappers and agent for one experiment, then writes the
/// CSV and any requested artifacts. Deterministic given the config.
RunResult run(const ExperimentConfig& cfg);

struct CompareSummary {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double difference = 0.0;  // mean_a - mean_b
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.95;

  bool ci_excludes_zero() const { return ci_low > 0.0 || ci_high < 0.0; }
};

struct CompareOptions {
  std::size_t window = 100;  // trailing episodes taken from each run
  int resamples = 10000;
  double confidence = 0.95;
  std::uint64_t seed = 0x5eed;
};

/// Percentile bootstrap on the difference of means, each run resampled
/// independently.
CompareSummary compare(std::span<const double> a, std::span<const double> b,
                       const CompareOptions& opts = {});
CompareSummary compare(std::span<const EpisodeRecord> a, std::span<const EpisodeRecord> b,
                       const CompareOptions& opts = {});

void print_summary(std::ostream& os, const CompareSummary& s, std::string_view label_a,
                   std::string_view label_b);

struct LabeledRun {
  std::string label;
  std::vector<EpisodeRecord> records;
};

/// Standalone SVG of moving_avg_10 against episode, one polyline per run.
/// Throws std::invalid_argument if there are no runs or a run is empty.
void render_curves(std::ostream& os, std::span<const LabeledRun> runs);

/// Reads LANDER_RL_LOG (trace, debug, info, warn, error, off) into the global
/// logger level. Unknown values fall back to warn.
void init_logging();

}  // namespace lunar
