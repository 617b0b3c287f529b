#include "lunar/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lunar/mlp.hpp"
#include "lunar/pomdp.hpp"
#include "lunar/text_io.hpp"

namespace lunar {

std::string_view agent_name(AgentKind a) {
  switch (a) {
    case AgentKind::Random: return "random";
    case AgentKind::Sarsa: return "sarsa";
    case AgentKind::Dqn: return "dqn";
    case AgentKind::Pomdp: return "pomdp";
  }
  return "?";
}

std::string_view mode_name(RunMode m) { return m == RunMode::Train ? "train" : "evaluate"; }

namespace {

template <typename T>
T number(std::string_view key, std::string_view value) {
  const auto v = parse_number<T>(value);
  if (!v) throw ConfigError(std::string(key), "not a number: '" + std::string(value) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(*v)) throw ConfigError(std::string(key), "must be finite");
  }
  return *v;
}

bool boolean(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

template <typename T>
Setter physics_field(T PhysicsParams::*field) {
  return [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
    c.physics.*field = number<T>(k, v);
  };
}

NoiseSpec& noise(ExperimentConfig& c) {
  if (!c.uncertainty.noise) c.uncertainty.noise = NoiseSpec{};
  return *c.uncertainty.noise;
}

ForceSpec& force(ExperimentConfig& c) {
  if (!c.uncertainty.force) c.uncertainty.force = ForceSpec{.name = "custom"};
  return *c.uncertainty.force;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"agent",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "random") c.agent = AgentKind::Random;
         else if (v == "sarsa") c.agent = AgentKind::Sarsa;
         else if (v == "dqn") c.agent = AgentKind::Dqn;
         else if (v == "pomdp") c.agent = AgentKind::Pomdp;
         else throw ConfigError(std::string(k), "unknown agent '" + std::string(v) + "'");
       }},
      {"mode",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "train") c.mode = RunMode::Train;
         else if (v == "evaluate") c.mode = RunMode::Evaluate;
         else throw ConfigError(std::string(k), "expected train or evaluate");
       }},
      {"episodes",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.episodes = number<int>(k, v);
         if (c.episodes < 0) throw ConfigError(std::string(k), "must be >= 0");
       }},
      {"seed", [](ExperimentConfig& c, std::string_view k,
                  std::string_view v) { c.seed = number<std::uint64_t>(k, v); }},
      {"label", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.label = v; }},
      {"out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.out = v; }},
      {"sarsa.scheme",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const auto& names = scheme_names();
         if (std::find(names.begin(), names.end(), v) == names.end()) {
           throw ConfigError(std::string(k), "unknown scheme '" + std::string(v) + "'");
         }
         c.scheme = v;
       }},
      {"sarsa.schedule",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v != "staged" && v != "compressed") {
           throw ConfigError(std::string(k), "expected staged or compressed");
         }
         c.schedule = v;
       }},
      {"sarsa.alpha", [](ExperimentConfig& c, std::string_view k,
                         std::string_view v) { c.sarsa.alpha = number<double>(k, v); }},
      {"sarsa.gamma", [](ExperimentConfig& c, std::string_view k,
                         std::string_view v) { c.sarsa.gamma = number<double>(k, v); }},
      {"sarsa.q_init", [](ExperimentConfig& c, std::string_view k,
                          std::string_view v) { c.sarsa.q_init = number<double>(k, v); }},
      {"dqn.gamma", [](ExperimentConfig& c, std::string_view k,
                       std::string_view v) { c.dqn.gamma = number<double>(k, v); }},
      {"dqn.lr", [](ExperimentConfig& c, std::string_view k,
                    std::string_view v) { c.dqn.lr = number<double>(k, v); }},
      {"dqn.batch_size", [](ExperimentConfig& c, std::string_view k,
                            std::string_view v) { c.dqn.batch_size = number<int>(k, v); }},
      {"dqn.capacity", [](ExperimentConfig& c, std::string_view k,
                          std::string_view v) { c.dqn.capacity = number<std::size_t>(k, v); }},
      {"dqn.hidden_width", [](ExperimentConfig& c, std::string_view k,
                              std::string_view v) { c.dqn.hidden_width = number<int>(k, v); }},
      {"dqn.target_sync",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.dqn.target_sync_interval = number<int>(k, v);
       }},
      {"dqn.epsilon_decay", [](ExperimentConfig& c, std::string_view k,
                               std::string_view v) { c.dqn.epsilon_decay = number<double>(k, v); }},
      {"dqn.epsilon_min", [](ExperimentConfig& c, std::string_view k,
                             std::string_view v) { c.dqn.epsilon_min = number<double>(k, v); }},
      {"dqn.optimizer",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "adam") c.dqn.optimizer = OptimizerKind::Adam;
         else if (v == "sgd") c.dqn.optimizer = OptimizerKind::Sgd;
         else throw ConfigError(std::string(k), "expected adam or sgd");
       }},
      {"noise.sigma", [](ExperimentConfig& c, std::string_view k,
                         std::string_view v) { noise(c).sigma = number<double>(k, v); }},
      {"noise.y", [](ExperimentConfig& c, std::string_view k,
                     std::string_view v) { noise(c).noise_y = boolean(k, v); }},
      {"failure.prob",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.uncertainty.failure = FailureSpec{number<double>(k, v)};
       }},
      {"force.preset",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const auto& names = force_preset_names();
         if (std::find(names.begin(), names.end(), v) == names.end()) {
           throw ConfigError(std::string(k), "unknown preset '" + std::string(v) + "'");
         }
         // Scaled later, once physics overrides are known.
         c.uncertainty.force = ForceSpec{.name = std::string(v)};
       }},
      {"force.mean_x", [](ExperimentConfig& c, std::string_view k,
                          std::string_view v) { force(c).mean_x = number<double>(k, v); }},
      {"force.mean_y", [](ExperimentConfig& c, std::string_view k,
                          std::string_view v) { force(c).mean_y = number<double>(k, v); }},
      {"force.variance", [](ExperimentConfig& c, std::string_view k,
                            std::string_view v) { force(c).variance = number<double>(k, v); }},
      {"pomdp.sigma", [](ExperimentConfig& c, std::string_view k,
                         std::string_view v) { c.pomdp_sigma = number<double>(k, v); }},
      {"pomdp.belief_y", [](ExperimentConfig& c, std::string_view k,
                            std::string_view v) { c.pomdp_belief_y = boolean(k, v); }},
      {"q_table.in", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.q_table_in = v; }},
      {"q_table.out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.q_table_out = v; }},
      {"weights.in", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.weights_in = v; }},
      {"weights.out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.weights_out = v; }},
      {"physics.dt", physics_field(&PhysicsParams::dt)},
      {"physics.gravity", physics_field(&PhysicsParams::gravity)},
      {"physics.main_engine_power", physics_field(&PhysicsParams::main_engine_power)},
      {"physics.side_engine_power", physics_field(&PhysicsParams::side_engine_power)},
      {"physics.side_engine_torque", physics_field(&PhysicsParams::side_engine_torque)},
      {"physics.pad_half_width", physics_field(&PhysicsParams::pad_half_width)},
      {"physics.max_steps", physics_field(&PhysicsParams::max_steps)},
      {"physics.spawn_height", physics_field(&PhysicsParams::spawn_height)},
      {"physics.landing_speed_limit", physics_field(&PhysicsParams::landing_speed_limit)},
      {"physics.tilt_limit", physics_field(&PhysicsParams::tilt_limit)},
      {"physics.bounds_x", physics_field(&PhysicsParams::bounds_x)},
      {"physics.init_impulse", physics_field(&PhysicsParams::init_impulse)},
      {"physics.settle_steps", physics_field(&PhysicsParams::settle_steps)},
      {"physics.leg_spread", physics_field(&PhysicsParams::leg_spread)},
      {"physics.crash_speed", physics_field(&PhysicsParams::crash_speed)},
      {"physics.contact_tolerance", physics_field(&PhysicsParams::contact_tolerance)},
      {"physics.ground_friction", physics_field(&PhysicsParams::ground_friction)},
      {"physics.ground_settle_rate", physics_field(&PhysicsParams::ground_settle_rate)},
  };
  return table;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown config key");
}

SarsaConfig ExperimentConfig::resolved_sarsa() const {
  SarsaConfig c = sarsa;
  c.scheme = named_scheme(scheme);
  c.episodes = episodes;
  c.schedule = schedule == "staged" ? staged_schedule() : compressed_schedule(episodes);
  return c;
}

DqnConfig ExperimentConfig::resolved_dqn() const {
  DqnConfig c = dqn;
  c.episodes = episodes;
  return c;
}

double ExperimentConfig::belief_sigma() const {
  if (pomdp_sigma > 0.0) return pomdp_sigma;
  if (uncertainty.noise && uncertainty.noise->sigma > 0.0) return uncertainty.noise->sigma;
  return 0.05;
}

bool ExperimentConfig::belief_covers_y() const {
  if (pomdp_belief_y) return *pomdp_belief_y;
  return !uncertainty.noise || uncertainty.noise->noise_y;
}

std::string ExperimentConfig::display_label() const {
  if (!label.empty()) return label;
  return std::string(agent_name(agent)) + "-" + std::string(mode_name(mode));
}

namespace {

// Force presets are stored by name and scaled by the main engine power here.
UncertaintySpec resolved_uncertainty(const ExperimentConfig& c) {
  UncertaintySpec u = c.uncertainty;
  if (u.force) {
    const auto& names = force_preset_names();
    if (std::find(names.begin(), names.end(), u.force->name) != names.end()) {
      u.force = force_preset(u.force->name, c.physics.main_engine_power);
    }
  }
  return u;
}

void require_file(const std::filesystem::path& path, const char* key) {
  if (path.empty()) throw ConfigError(key, "required for this agent and mode");
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(key, "no such file: " + path.string());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  auto wrap = [](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  wrap("physics", [&] { physics.validate(); });
  const UncertaintySpec u = resolved_uncertainty(*this);
  if (u.noise) wrap("noise.sigma", [&] { UncertaintySpec{u.noise, {}, {}}.validate(); });
  if (u.failure) wrap("failure.prob", [&] { UncertaintySpec{{}, u.failure, {}}.validate(); });
  if (u.force) wrap("force.variance", [&] { UncertaintySpec{{}, {}, u.force}.validate(); });
  if (agent == AgentKind::Sarsa || agent == AgentKind::Pomdp) {
    wrap("sarsa", [&] { resolved_sarsa().validate(); });
  }
  if (agent == AgentKind::Dqn) wrap("dqn", [&] { resolved_dqn().validate(); });
  if (pomdp_sigma < 0.0) throw ConfigError("pomdp.sigma", "must be >= 0");

  if (agent == AgentKind::Pomdp) {
    if (mode != RunMode::Evaluate) throw ConfigError("mode", "agent=pomdp only evaluates");
    require_file(q_table_in, "q_table.in");
  }
  if (mode == RunMode::Evaluate) {
    if (agent == AgentKind::Sarsa) require_file(q_table_in, "q_table.in");
    if (agent == AgentKind::Dqn) require_file(weights_in, "weights.in");
  } else {
    if (!q_table_in.empty()) require_file(q_table_in, "q_table.in");
    if (!weights_in.empty()) require_file(weights_in, "weights.in");
  }
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key=value");
    const auto key = trim(body.substr(0, eq));
    try {
      base.set(key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), "line " + std::to_string(lineno) + ": " +
                                     std::string(e.what()).substr(e.key().size() + 2));
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is = open_in(path);
  ExperimentConfig cfg = parse_config(is, std::move(base));
  // Relative artifact paths are taken relative to the working directory, not
  // the config file, so that shipped configs run from the repository root.
  return cfg;
}

std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("moving_average window must be >= 1");
  const auto w = static_cast<std::size_t>(window);
  std::vector<double> out(values.size());
  // Summed afresh per element so the result carries no running-sum drift.
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t lo = k + 1 > w ? k + 1 - w : 0;
    const double sum = std::accumulate(values.begin() + lo, values.begin() + k + 1, 0.0);
    out[k] = sum / static_cast<double>(k - lo + 1);
  }
  return out;
}

std::vector<EpisodeRecord> to_records(const RewardLog& log) {
  std::vector<double> rewards(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) rewards[i] = log[i].reward;
  const auto ma = moving_average(rewards, 10);
  std::vector<EpisodeRecord> out(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    out[i] = {static_cast<int>(i), log[i].reward, ma[i], log[i].epsilon, log[i].steps,
              log[i].verdict};
  }
  return out;
}

void write_csv(std::ostream& os, std::span<const EpisodeRecord> records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.episode << ',' << format_double(r.reward) << ',' << format_double(r.moving_avg_10)
       << ',' << format_double(r.epsilon) << ',' << r.steps << ',' << verdict_name(r.verdict)
       << '\n';
  }
}

std::vector<EpisodeRecord> parse_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || trim(line) != kCsvHeader) {
    throw ParseError(lineno, "expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<EpisodeRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 6) {
      throw ParseError(lineno, "expected 6 fields, got " + std::to_string(f.size()));
    }
    EpisodeRecord r;
    auto num = [&](std::string_view s, auto& dst, const char* name) {
      const auto v = parse_number<std::remove_reference_t<decltype(dst)>>(s);
      if (!v) throw ParseError(lineno, std::string("bad ") + name + " '" + std::string(s) + "'");
      dst = *v;
    };
    num(f[0], r.episode, "episode");
    num(f[1], r.reward, "reward");
    num(f[2], r.moving_avg_10, "moving_avg_10");
    num(f[3], r.epsilon, "epsilon");
    num(f[4], r.steps, "steps");
    const auto v = verdict_from_name(f[5]);
    if (!v) throw ParseError(lineno, "bad verdict '" + std::string(f[5]) + "'");
    r.verdict = *v;
    out.push_back(r);
  }
  return out;
}

void write_csv_file(const std::filesystem::path& path, std::span<const EpisodeRecord> records) {
  std::ofstream os = open_out(path);
  write_csv(os, records);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EpisodeRecord> read_csv_file(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  return parse_csv(is);
}

RunResult run(const ExperimentConfig& cfg) {
  cfg.validate();
  const UncertaintySpec wrappers = resolved_uncertainty(cfg);
  const std::string label = cfg.display_label();
  spdlog::info("{}: agent={} mode={} episodes={} seed={}", label, agent_name(cfg.agent),
               mode_name(cfg.mode), cfg.episodes, cfg.seed);

  const int report_every = std::max(1, cfg.episodes / 20);
  const EpisodeCallback progress = [&](int ep, const EpisodeStats& s) {
    spdlog::debug("{} episode {} reward {:.3f} steps {} {}", label, ep, s.reward, s.steps,
                  verdict_name(s.verdict));
    if ((ep + 1) % report_every == 0) {
      spdlog::info("{}: {}/{} episodes", label, ep + 1, cfg.episodes);
    }
  };

  RunResult result;
  RewardLog log;

  switch (cfg.agent) {
    case AgentKind::Random:
      log = run_random_agent(cfg.physics, wrappers, cfg.episodes, cfg.seed, progress);
      break;

    case AgentKind::Sarsa: {
      const SarsaConfig sc = cfg.resolved_sarsa();
      std::optional<QTable> loaded;
      if (!cfg.q_table_in.empty()) {
        std::ifstream is = open_in(cfg.q_table_in);
        loaded = load_qtable(is);
        if (loaded->scheme.name != sc.scheme.name) {
          throw ConfigError("q_table.in", "table uses scheme " + loaded->scheme.name +
                                              " but sarsa.scheme is " + sc.scheme.name);
        }
      }
      if (cfg.mode == RunMode::Evaluate) {
        log = evaluate_sarsa(*loaded, cfg.physics, wrappers, cfg.episodes, cfg.seed, progress);
      } else {
        auto trained = train_sarsa(cfg.physics, wrappers, sc, cfg.seed,
                                   loaded ? &*loaded : nullptr, progress);
        log = std::move(trained.log);
        if (!cfg.q_table_out.empty()) {
          std::ofstream os = open_out(cfg.q_table_out);
          save_qtable(os, trained.table);
          result.artifacts.push_back(cfg.q_table_out);
        }
      }
      break;
    }

    case AgentKind::Dqn: {
      std::optional<QNetwork> loaded;
      if (!cfg.weights_in.empty()) {
        std::ifstream is = open_in(cfg.weights_in);
        loaded = load_mlp<double>(is);
      }
      if (cfg.mode == RunMode::Evaluate) {
        log = evaluate_dqn(*loaded, cfg.physics, wrappers, cfg.episodes, cfg.seed, progress);
      } else {
        auto trained = train_dqn(cfg.physics, wrappers, cfg.resolved_dqn(), cfg.seed,
                                 loaded ? &*loaded : nullptr, progress);
        log = std::move(trained.log);
        if (!cfg.weights_out.empty()) {
          std::ofstream os = open_out(cfg.weights_out);
          save_mlp(os, trained.net);
          result.artifacts.push_back(cfg.weights_out);
        }
      }
      break;
    }

    case AgentKind::Pomdp: {
      std::ifstream is = open_in(cfg.q_table_in);
      const QTable q = load_qtable(is);
      log = evaluate_pomdp(q, cfg.belief_sigma(), cfg.belief_covers_y(), cfg.physics, wrappers,
                           cfg.episodes, cfg.seed, progress);
      break;
    }
  }

  result.records = to_records(log);
  if (!cfg.out.empty()) {
    write_csv_file(cfg.out, result.records);
    result.artifacts.insert(result.artifacts.begin(), cfg.out);
  }
  if (!result.records.empty()) {
    spdlog::info("{}: final moving average {:.3f}", label, result.records.back().moving_avg_10);
  }
  return result;
}

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::span<const double> tail(std::span<const double> v, std::size_t window) {
  return v.size() > window ? v.subspan(v.size() - window) : v;
}

// Linear interpolation between order statistics.
double quantile(std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

CompareSummary compare(std::span<const double> a_all, std::span<const double> b_all,
                       const CompareOptions& opts) {
  if (a_all.empty() || b_all.empty()) throw std::invalid_argument("compare needs two non-empty runs");
  if (opts.window == 0 || opts.resamples < 1 || !(opts.confidence > 0.0 && opts.confidence < 1.0)) {
    throw std::invalid_argument("compare: bad options");
  }
  const auto a = tail(a_all, opts.window);
  const auto b = tail(b_all, opts.window);

  CompareSummary s;
  s.n_a = a.size();
  s.n_b = b.size();
  s.mean_a = mean(a);
  s.mean_b = mean(b);
  s.difference = s.mean_a - s.mean_b;
  s.confidence = opts.confidence;

  Rng rng(opts.seed);
  std::vector<double> diffs(static_cast<std::size_t>(opts.resamples));
  for (auto& d : diffs) {
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sa += a[rng.below(a.size())];
    for (std::size_t i = 0; i < b.size(); ++i) sb += b[rng.below(b.size())];
    d = sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size());
  }
  std::sort(diffs.begin(), diffs.end());
  const double tail_p = 0.5 * (1.0 - opts.confidence);
  s.ci_low = quantile(diffs, tail_p);
  s.ci_high = quantile(diffs, 1.0 - tail_p);
  return s;
}

CompareSummary compare(std::span<const EpisodeRecord> a, std::span<const EpisodeRecord> b,
                       const CompareOptions& opts) {
  auto rewards = [](std::span<const EpisodeRecord> r) {
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = r[i].reward;
    return v;
  };
  return compare(rewards(a), rewards(b), opts);
}

void print_summary(std::ostream& os, const CompareSummary& s, std::string_view label_a,
                   std::string_view label_b) {
  os << label_a << ": mean " << format_double(s.mean_a) << " over " << s.n_a << " episodes\n"
     << label_b << ": mean " << format_double(s.mean_b) << " over " << s.n_b << " episodes\n"
     << "difference: " << format_double(s.difference) << "\n"
     << static_cast<int>(std::lround(s.confidence * 100)) << "% bootstrap CI: ["
     << format_double(s.ci_low) << ", " << format_double(s.ci_high) << "]"
     << (s.ci_excludes_zero() ? "" : " (includes 0)") << "\n";
}

void render_curves(std::ostream& os, std::span<const LabeledRun> runs) {
  if (runs.empty()) throw std::invalid_argument("render_curves: no runs");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int max_ep = 0;
  for (const auto& r : runs) {
    if (r.records.empty()) throw std::invalid_argument("render_curves: run '" + r.label + "' is empty");
    for (const auto& rec : r.records) {
      lo = std::min(lo, rec.moving_avg_10);
      hi = std::max(hi, rec.moving_avg_10);
      max_ep = std::max(max_ep, rec.episode);
    }
  }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }

  constexpr double kW = 800, kH = 480, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double ep) { return kLeft + (max_ep > 0 ? ep / max_ep : 0.0) * pw; };
  auto py = [&](double v) { return kTop + (hi - v) / (hi - lo) * ph; };

  static constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                         "#9467bd", "#ff7f0e", "#17becf"};
  static constexpr std::array<const char*, 3> kDashes = {"", "6 3", "2 2"};

  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<g stroke=\"#444\" stroke-width=\"1\">\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\""
     << kTop + ph << "\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kTop + ph << "\"/>\n";
  if (lo < 0.0 && hi > 0.0) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << fmt(py(0)) << "\" stroke-dasharray=\"1 3\"/>\n";
  }
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n"
     << "<text x=\"" << kLeft << "\" y=\"" << kH - 15 << "\">0</text>\n"
     << "<text x=\"" << kLeft + pw << "\" y=\"" << kH - 15 << "\" text-anchor=\"end\">" << max_ep
     << "</text>\n"
     << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15
     << "\" text-anchor=\"middle\">episode</text>\n"
     << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << fmt(hi)
     << "</text>\n"
     << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">" << fmt(lo)
     << "</text>\n"
     << "<text transform=\"translate(15," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">moving average (10)</text>\n</g>\n";

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    const char* dash = kDashes[(i / kColors.size()) % kDashes.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (*dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << " points=\"";
    for (std::size_t k = 0; k < runs[i].records.size(); ++k) {
      const auto& rec = runs[i].records[k];
      os << (k ? " " : "") << fmt(px(rec.episode)) << ',' << fmt(py(rec.moving_avg_10));
    }
    os << "\"/>\n";

    const double ly = kTop + 15 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << kLeft + pw - 125 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"";
    if (*dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << "/>\n<text x=\"" << kLeft + pw - 120 << "\" y=\"" << ly
       << "\" font-family=\"sans-serif\" font-size=\"12\">";
    for (char c : runs[i].label) {
      switch (c) {
        case '<': os << "&lt;"; break;
        case '>': os << "&gt;"; break;
        case '&': os << "&amp;"; break;
        default: os << c;
      }
    }
    os << "</text>\n";
  }
  os << "</svg>\n";
}

void init_logging() {
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("LANDER_RL_LOG")) {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown strings to off; only accept it when asked for.
    if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
  }
  spdlog::set_level(level);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
}

}  // namespace lunar
