// r3l: command-line driver for training, evaluation, sweeps, regret runs and
// post-hoc reports.
//
//   r3l train  --config run.cfg [--seed N | --seeds A..B] [--out DIR] [--override k=v ...]
//   r3l eval   --run DIR [--episodes N] [--seed N]
//   r3l sweep  --config sweep.cfg [--seeds A..B] [--out DIR] [--override k=v ...]
//   r3l regret --config regret.cfg [--seeds A..B] [--out DIR] [--override k=v ...]
//   r3l scatter DIR... --out DIR
//   r3l report  DIR... --out DIR
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "r3l/agent.hpp"
#include "r3l/harness/config.hpp"
#include "r3l/harness/regret.hpp"
#include "r3l/harness/report.hpp"
#include "r3l/harness/sweep.hpp"
#include "r3l/harness/train.hpp"

namespace fs = std::filesystem;
using namespace r3l;
using namespace r3l::harness;

namespace {

struct CommonOptions {
  std::string config;
  std::string seed;
  std::string seeds;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool single_seed) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  if (single_seed) cmd->add_option("--seed", o.seed, "single seed");
  cmd->add_option("--seeds", o.seeds, "seed range A..B or list a,b,c");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--override", o.overrides, "key=value, repeatable")->take_all();
}

KeyValues load_kv(const CommonOptions& o) {
  KeyValues kv = o.config.empty() ? KeyValues{} : KeyValues::load(o.config);
  for (const auto& ov : o.overrides) kv.override_with(ov);
  if (!o.seed.empty() && !o.seeds.empty()) throw ConfigError("use either --seed or --seeds, not both");
  if (!o.seed.empty()) kv.set("run.seeds", o.seed);
  if (!o.seeds.empty()) kv.set("run.seeds", o.seeds);
  if (!o.out.empty()) kv.set("run.out_dir", o.out);
  return kv;
}

int cmd_train(const CommonOptions& o) {
  const auto rc = run_config_from(load_kv(o));
  const fs::path out = rc.out_dir;
  const bool many = rc.seeds.size() > 1;
  parallel_for(rc.seeds.size(), worker_count(), [&](std::size_t i) {
    const auto seed = rc.seeds[i];
    const auto r = train(rc, seed, many ? out / ("seed" + std::to_string(seed)) : out);
    std::printf("seed %llu: %zu episodes, final eval return %s, mean steps to exhaustion %s\n",
                static_cast<unsigned long long>(seed), r.episodes.size(), fmt(r.final_eval_return()).c_str(),
                fmt(r.mean_steps_to_exhaustion()).c_str());
  });
  return 0;
}

int cmd_eval(const std::string& run_dir, std::size_t episodes, std::uint64_t seed) {
  const fs::path dir = run_dir;
  const auto saved = KeyValues::load((dir / "config.txt").string());
  KeyValues kv;
  for (const auto& [k, v] : saved.entries())
    if (k != "run.seed") kv.set(k, v);
  const auto rc = run_config_from(kv);
  const auto q = agent::load_qtable((dir / "qtable.txt").string());
  const agent::Discretizer disc(rc.env, rc.agent.bins);
  if (q.cells != disc.cell_count() || q.actions != disc.action_count())
    throw ConfigError("q-table shape does not match the run configuration");
  const auto ev = agent::evaluate(q, disc, rc.env, episodes ? episodes : rc.agent.eval_episodes, seed);
  std::printf("eval return %s +- %s over %zu greedy episodes\n", fmt(ev.mean_return).c_str(),
              fmt(ev.std_return).c_str(), ev.returns.size());
  auto csv = open_output(dir / "eval_checkpoint.csv");
  csv << kSchemaLine << "\nepisode,return\n";
  for (std::size_t i = 0; i < ev.returns.size(); ++i) csv << i << ',' << fmt(ev.returns[i]) << '\n';
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  auto kv = load_kv(o);
  const fs::path out = kv.get_string("run.out_dir", "runs/sweep");
  auto grid = extract_grid(kv);
  KeyValues base;
  for (const auto& [k, v] : kv.entries())
    if (k != "run.out_dir") base.set(k, v);
  const auto result = sweep(base, grid, out);
  std::size_t failed = 0;
  for (const auto& c : result.cells) {
    std::printf("cell %zu:", c.cell);
    for (const auto& [k, v] : c.assignment) std::printf(" %s=%s", k.c_str(), v.c_str());
    std::printf("  final eval %s +- %s (%zu ok, %zu failed)\n", fmt(c.mean).c_str(), fmt(c.std).c_str(), c.completed,
                c.failed);
    failed += c.failed;
  }
  std::printf("summary written to %s\n", (out / "summary.csv").string().c_str());
  return failed ? 3 : 0;
}

int cmd_regret(const CommonOptions& o) {
  const auto rc = regret_config_from(load_kv(o));
  const auto outcomes = run_regret(rc, rc.out_dir);
  for (const auto& r : outcomes) {
    std::printf("seed %llu: regret exponent %.4f, cumulative regret %s\n", static_cast<unsigned long long>(r.seed),
                r.exponent, fmt(r.final_cumulative_regret).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resource-restricted RL experiments"};
  app.require_subcommand(1);

  CommonOptions train_o, sweep_o, regret_o;
  auto* train_cmd = app.add_subcommand("train", "train a Q-agent on a mountain car variant");
  add_common(train_cmd, train_o, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "run a cartesian grid of overrides across seeds");
  add_common(sweep_cmd, sweep_o, false);
  auto* regret_cmd = app.add_subcommand("regret", "UCB-Hoeffding regret on a tabular gridworld");
  add_common(regret_cmd, regret_o, false);

  std::string eval_dir;
  std::size_t eval_episodes = 0;
  std::uint64_t eval_seed_value = 0;
  auto* eval_cmd = app.add_subcommand("eval", "greedy evaluation of a trained run's Q-table");
  eval_cmd->add_option("--run", eval_dir, "run directory with config.txt and qtable.txt")->required();
  eval_cmd->add_option("--episodes", eval_episodes, "episodes (default: the run's agent.eval_episodes)");
  eval_cmd->add_option("--seed", eval_seed_value, "evaluation seed");

  std::vector<std::string> scatter_dirs, report_dirs;
  std::string scatter_out = "runs/scatter", report_out = "runs/report";
  auto* scatter_cmd = app.add_subcommand("scatter", "plot the states where goods were unloaded");
  scatter_cmd->add_option("runs", scatter_dirs, "run directories")->required();
  scatter_cmd->add_option("--out", scatter_out, "output directory");
  auto* report_cmd = app.add_subcommand("report", "learning curves and a text digest for run directories");
  report_cmd->add_option("runs", report_dirs, "run directories")->required();
  report_cmd->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(train_o);
    if (*sweep_cmd) return cmd_sweep(sweep_o);
    if (*regret_cmd) return cmd_regret(regret_o);
    if (*eval_cmd) return cmd_eval(eval_dir, eval_episodes, eval_seed_value);
    if (*scatter_cmd) {
      std::vector<fs::path> dirs(scatter_dirs.begin(), scatter_dirs.end());
      const auto n = scatter_report(dirs, scatter_out);
      std::printf("%zu unload points written to %s\n", n, scatter_out.c_str());
      return 0;
    }
    if (*report_cmd) {
      std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
      for (const auto& d : report(dirs, report_out)) {
        std::printf("%s: final eval return %s, mean steps to exhaustion %s\n", d.label.c_str(),
                    fmt(d.final_eval_return).c_str(), fmt(d.mean_steps_to_exhaustion).c_str());
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
