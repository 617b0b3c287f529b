// Command-line front end: train, evaluate, compare, plot, sweep.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lunar/discretization.hpp"
#include "lunar/harness.hpp"
#include "lunar/pomdp.hpp"
#include "lunar/text_io.hpp"

namespace fs = std::filesystem;
using namespace lunar;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::string agent;
  std::string out;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("-c,--config", f.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "experiment seed");
  cmd->add_option("--episodes", f.episodes, "episode count");
  cmd->add_option("--agent", f.agent, "random, sarsa, dqn or pomdp");
  cmd->add_option("-o,--out", f.out, "episode CSV path");
  cmd->add_option("-s,--set", f.sets, "extra key=value override (repeatable)");
}

ExperimentConfig build_config(const RunFlags& f, RunMode mode) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  cfg.mode = mode;
  if (f.seed) cfg.seed = *f.seed;
  if (f.episodes) cfg.set("episodes", std::to_string(*f.episodes));
  if (!f.agent.empty()) cfg.set("agent", f.agent);
  if (!f.out.empty()) cfg.out = f.out;
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, "expected key=value");
    cfg.set(trim(std::string_view(kv).substr(0, eq)), std::string_view(kv).substr(eq + 1));
  }
  return cfg;
}

void report(const RunResult& r, const ExperimentConfig& cfg) {
  std::cout << cfg.display_label() << ": " << r.records.size() << " episodes";
  if (!r.records.empty()) {
    std::cout << ", final moving average " << format_double(r.records.back().moving_avg_10);
  }
  std::cout << "\n";
  for (const auto& p : r.artifacts) std::cout << "  wrote " << p.string() << "\n";
}

// "name_seed7.csv" from "name.csv" when a sweep fans one config out over seeds.
fs::path with_seed(const fs::path& p, std::uint64_t seed) {
  if (p.empty()) return p;
  fs::path out = p;
  out.replace_filename(p.stem().string() + "_seed" + std::to_string(seed) + p.extension().string());
  return out;
}

int sweep(const std::vector<std::string>& configs, const std::vector<std::uint64_t>& seeds,
          const std::string& out_dir, unsigned jobs) {
  std::vector<ExperimentConfig> work;
  for (const auto& path : configs) {
    const ExperimentConfig base = load_config(path);
    const std::string stem = fs::path(path).stem().string();
    const auto run_seeds = seeds.empty() ? std::vector<std::uint64_t>{base.seed} : seeds;
    for (auto seed : run_seeds) {
      ExperimentConfig c = base;
      c.seed = seed;
      if (c.label.empty()) c.label = stem;
      if (!out_dir.empty()) c.out = fs::path(out_dir) / (stem + ".csv");
      if (c.out.empty()) c.out = stem + ".csv";
      if (!seeds.empty()) {
        c.label += " seed " + std::to_string(seed);
        c.out = with_seed(c.out, seed);
        c.q_table_out = with_seed(c.q_table_out, seed);
        c.weights_out = with_seed(c.weights_out, seed);
      }
      work.push_back(std::move(c));
    }
  }

  // Runs share nothing; each thread pulls the next index.
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        const RunResult r = run(work[i]);
        std::lock_guard lock(io);
        report(r, work[i]);
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(io);
        std::cerr << work[i].display_label() << ": " << e.what() << "\n";
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Tabular and deep RL agents for a 2D lunar lander"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train an agent and write its learning curve");
  add_run_flags(train, train_flags);

  RunFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "roll out a saved agent without learning");
  add_run_flags(evaluate, eval_flags);

  std::string csv_a, csv_b;
  CompareOptions cmp_opts;
  auto* cmp = app.add_subcommand("compare", "final-window means and bootstrap CI of A - B");
  cmp->add_option("a", csv_a, "episode CSV")->required()->check(CLI::ExistingFile);
  cmp->add_option("b", csv_b, "episode CSV")->required()->check(CLI::ExistingFile);
  cmp->add_option("--window", cmp_opts.window, "trailing episodes per run")->capture_default_str();
  cmp->add_option("--resamples", cmp_opts.resamples)->capture_default_str();
  cmp->add_option("--confidence", cmp_opts.confidence)->capture_default_str();
  cmp->add_option("--seed", cmp_opts.seed, "bootstrap seed")->capture_default_str();

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "SVG of moving averages; inputs are PATH or LABEL=PATH");
  plot->add_option("runs", plot_inputs)->required();
  plot->add_option("-o,--out", plot_out, "SVG path")->required();

  std::string scheme_name;
  auto* desc = app.add_subcommand("describe-scheme", "print a discretization scheme's axis table");
  desc->add_option("name", scheme_name)->required();

  std::vector<std::string> sweep_configs;
  std::vector<std::uint64_t> sweep_seeds;
  std::string sweep_dir;
  unsigned sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sw = app.add_subcommand("sweep", "run several configs in parallel");
  sw->add_option("configs", sweep_configs)->required()->check(CLI::ExistingFile);
  sw->add_option("--seeds", sweep_seeds, "run every config once per seed")->delimiter(',');
  sw->add_option("--out-dir", sweep_dir, "directory for the CSVs");
  sw->add_option("-j,--jobs", sweep_jobs)->capture_default_str();

  double flip_sigma = 0.05, flip_max = 0.2, flip_step = 0.01;
  auto* flip = app.add_subcommand("flip-table", "chance that noise moves x across the pad centre");
  flip->add_option("--sigma", flip_sigma)->capture_default_str();
  flip->add_option("--max", flip_max)->capture_default_str();
  flip->add_option("--step", flip_step)->capture_default_str();

  auto* keys = app.add_subcommand("config-keys", "list every config key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train || *evaluate) {
      const bool is_train = train->parsed();
      const ExperimentConfig cfg =
          build_config(is_train ? train_flags : eval_flags, is_train ? RunMode::Train : RunMode::Evaluate);
      report(run(cfg), cfg);
    } else if (*cmp) {
      const auto a = read_csv_file(csv_a);
      const auto b = read_csv_file(csv_b);
      print_summary(std::cout, compare(a, b, cmp_opts), csv_a, csv_b);
    } else if (*plot) {
      std::vector<LabeledRun> runs;
      for (const auto& in : plot_inputs) {
        const auto eq = in.find('=');
        const fs::path path = eq == std::string::npos ? in : in.substr(eq + 1);
        const std::string label = eq == std::string::npos ? path.stem().string() : in.substr(0, eq);
        runs.push_back({label, read_csv_file(path)});
      }
      std::ofstream os(plot_out);
      if (!os) throw std::runtime_error("cannot write " + plot_out);
      render_curves(os, runs);
    } else if (*desc) {
      describe(std::cout, named_scheme(scheme_name));
    } else if (*sw) {
      return sweep(sweep_configs, sweep_seeds, sweep_dir, sweep_jobs);
    } else if (*flip) {
      if (!(flip_step > 0.0)) throw std::invalid_argument("--step must be > 0");
      std::cout << "x,flip_probability\n";
      const int n = static_cast<int>(std::floor(flip_max / flip_step + 1e-9));
      for (int i = 0; i <= n; ++i) {
        const double x = i * flip_step;
        std::cout << std::fixed << std::setprecision(4) << x << ',' << std::setprecision(6)
                  << flip_probability(x, flip_sigma) << "\n";
      }
    } else if (*keys) {
      for (const auto& k : config_keys()) std::cout << k << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
