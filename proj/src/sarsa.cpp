#include "lunar/sarsa.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lunar/rollout.hpp"
#include "lunar/text_io.hpp"

namespace lunar {

QTable::QTable(StateScheme s, double q_init) : scheme(std::move(s)) {
  scheme.validate();
  const auto n = static_cast<Eigen::Index>(scheme.state_count());
  values = QValues::Constant(n, kNumActions, q_init);
  visits = VisitCounts::Zero(n, kNumActions);
}

EpsilonSchedule staged_schedule() {
  return {{0, 100, 0.5}, {100, 500, 0.2}, {500, 2500, 0.1}, {2500, 7500, 0.01}, {7500, 10000, 0.0}};
}

EpsilonSchedule compressed_schedule(int episodes) {
  EpsilonSchedule out;
  for (const auto& stage : staged_schedule()) {
    const auto scale = [&](int b) {
      return static_cast<int>(std::llround(static_cast<double>(b) * episodes / 10000.0));
    };
    EpsilonStage s{scale(stage.start_episode), scale(stage.end_episode), stage.epsilon};
    if (s.end_episode > s.start_episode) out.push_back(s);
  }
  if (out.empty()) out.push_back({0, std::max(episodes, 1), staged_schedule().back().epsilon});
  return out;
}

double epsilon_for_episode(int episode, const EpsilonSchedule& schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty epsilon schedule");
  for (const auto& stage : schedule) {
    if (episode >= stage.start_episode && episode < stage.end_episode) return stage.epsilon;
  }
  return schedule.back().epsilon;
}

void SarsaConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("sarsa.alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("sarsa.gamma must be in [0, 1]");
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (schedule.empty()) throw std::invalid_argument("sarsa schedule is empty");
  int expected_start = 0;
  for (const auto& s : schedule) {
    if (s.start_episode != expected_start || s.end_episode <= s.start_episode) {
      throw std::invalid_argument("sarsa schedule stages must be contiguous from episode 0");
    }
    if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) {
      throw std::invalid_argument("sarsa schedule epsilon must be in [0, 1]");
    }
    expected_start = s.end_episode;
  }
}

Action greedy_action(const QTable& q, std::size_t s) {
  const auto row = q.values.row(static_cast<Eigen::Index>(s));
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (row(a) > row(best)) best = a;
  }
  return static_cast<Action>(best);
}

Action select_action(const QTable& q, std::size_t s, double epsilon, Rng& rng) {
  if (s >= q.state_count()) throw std::out_of_range("state index outside Q-table");
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<Action>(rng.below(kNumActions));
  }
  return greedy_action(q, s);
}

void sarsa_update(QTable& q, std::size_t s, Action a, double r, std::size_t s_next, Action a_next,
                  bool terminal, const SarsaConfig& cfg) {
  if (!std::isfinite(r)) throw std::invalid_argument("sarsa update with non-finite reward");
  if (s >= q.state_count() || s_next >= q.state_count()) {
    throw std::out_of_range("state index outside Q-table");
  }
  const double bootstrap = terminal ? 0.0 : cfg.gamma * q(s_next, a_next);
  double& cell = q(s, a);
  cell += cfg.alpha * (r + bootstrap - cell);
  ++q.visits(static_cast<Eigen::Index>(s), to_index(a));
}

SarsaRun train_sarsa(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                     const SarsaConfig& cfg, std::uint64_t seed, const QTable* initial,
                     const EpisodeCallback& on_episode) {
  cfg.validate();
  const auto seeds = SeedStreams::from(seed);
  Rng env_rng(seeds.env);
  Rng agent_rng(seeds.agent);
  PerturbedEnv env(physics, wrappers, seeds.uncertainty);

  SarsaRun run{initial ? *initial : QTable(cfg.scheme, cfg.q_init), {}};
  QTable& q = run.table;
  run.log.reserve(static_cast<std::size_t>(cfg.episodes));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double eps = epsilon_for_episode(ep, cfg.schedule);
    std::size_t s = state_index(env.reset(env_rng), q.scheme);
    Action a = select_action(q, s, eps, agent_rng);
    EpisodeStats stats;
    stats.epsilon = eps;
    while (true) {
      const auto step = env.step(a);
      const std::size_t s_next = state_index(step.observed, q.scheme);
      const bool terminal = step.outcome.terminal;
      const Action a_next = terminal ? Action::Noop : select_action(q, s_next, eps, agent_rng);
      sarsa_update(q, s, a, step.outcome.reward, s_next, a_next, terminal, cfg);
      stats.reward += step.outcome.reward;
      ++stats.steps;
      if (terminal) {
        stats.verdict = step.outcome.verdict;
        break;
      }
      s = s_next;
      a = a_next;
    }
    run.log.push_back(stats);
    if (on_episode) on_episode(ep, stats);
  }
  return run;
}

RewardLog evaluate_sarsa(const QTable& q, const PhysicsParams& physics,
                         const UncertaintySpec& wrappers, int episodes, std::uint64_t seed,
                         const EpisodeCallback& on_episode) {
  return run_policy(
      physics, wrappers, episodes, seed,
      [&](const LanderState& obs, Rng&) { return greedy_action(q, state_index(obs, q.scheme)); },
      on_episode, 0.0);
}

RewardLog run_random_agent(const PhysicsParams& physics, const UncertaintySpec& wrappers,
                           int episodes, std::uint64_t seed, const EpisodeCallback& on_episode) {
  return run_policy(
      physics, wrappers, episodes, seed,
      [](const LanderState&, Rng& rng) { return static_cast<Action>(rng.below(kNumActions)); },
      on_episode, 1.0);
}

void save_qtable(std::ostream& os, const QTable& q) {
  os << "scheme=" << q.scheme.name << " actions=" << kNumActions << " states=" << q.state_count()
     << "\n";
  for (Eigen::Index s = 0; s < q.values.rows(); ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const double v = q.values(s, a);
      if (v != 0.0) os << s << ' ' << a << ' ' << format_double(v) << '\n';
    }
  }
}

QTable load_qtable(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(1, "missing Q-table header");
  const auto header = tokens(line);
  std::string scheme_name;
  std::optional<long long> actions;
  std::optional<long long> states;
  for (auto tok : header) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw ParseError(1, "malformed header field '" + std::string(tok) + "'");
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "scheme") scheme_name = std::string(val);
    else if (key == "actions") actions = parse_number<long long>(val);
    else if (key == "states") states = parse_number<long long>(val);
    else throw ParseError(1, "unknown header field '" + std::string(key) + "'");
  }
  if (scheme_name.empty() || !actions || !states) throw ParseError(1, "incomplete Q-table header");
  if (*actions != kNumActions) throw ParseError(1, "expected actions=4");

  StateScheme scheme;
  try {
    scheme = named_scheme(scheme_name);
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, e.what());
  }
  if (static_cast<std::size_t>(*states) != scheme.state_count()) {
    throw ParseError(1, "states=" + std::to_string(*states) + " does not match scheme " +
                            scheme_name + " (" + std::to_string(scheme.state_count()) + ")");
  }

  QTable q(scheme, 0.0);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto t = tokens(line);
    if (t.size() != 3) throw ParseError(lineno, "expected 'state action value'");
    const auto s = parse_number<long long>(t[0]);
    const auto a = parse_number<int>(t[1]);
    const auto v = parse_number<double>(t[2]);
    if (!s || !a || !v) throw ParseError(lineno, "unparseable Q-table row");
    if (*s < 0 || static_cast<std::size_t>(*s) >= q.state_count() || *a < 0 || *a >= kNumActions) {
      throw ParseError(lineno, "Q-table cell out of range");
    }
    q.values(*s, *a) = *v;
  }
  return q;
}

}  // namespace lunar
