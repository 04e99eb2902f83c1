#pragma once

// Gridworld regret experiments for the weighted UCB-Hoeffding learner.

#include <filesystem>
#include <string>
#include <vector>

#include "r3l/envs.hpp"
#include "r3l/harness/config.hpp"
#include "r3l/harness/output.hpp"
#include "r3l/harness/sweep.hpp"
#include "r3l/tabular.hpp"

namespace r3l::harness {

struct RegretConfig {
  std::size_t states = 10;
  std::size_t horizon = 10;
  double initial_resource = 3.0;
  std::string gridworld_file;  // JSON; overrides the default chain when set
  std::size_t episodes = 100000;
  tabular::LearnerConfig learner;
  std::size_t fit_lo = 1000;
  std::size_t fit_hi = 0;  // 0 means the last episode
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "runs/regret";

  GridworldSpec gridworld() const {
    return gridworld_file.empty() ? default_chain(states, horizon, initial_resource)
                                  : load_gridworld(gridworld_file);
  }
};

inline RegretConfig regret_config_from(const KeyValues& kv) {
  RegretConfig rc;
  rc.states = static_cast<std::size_t>(kv.get_int("gridworld.states", static_cast<long long>(rc.states)));
  rc.horizon = static_cast<std::size_t>(kv.get_int("gridworld.horizon", static_cast<long long>(rc.horizon)));
  rc.initial_resource = kv.get_double("gridworld.initial_resource", rc.initial_resource);
  rc.gridworld_file = kv.get_string("gridworld.file", "");
  rc.episodes = static_cast<std::size_t>(kv.get_int("regret.episodes", static_cast<long long>(rc.episodes)));
  rc.learner.c = kv.get_double("regret.c", rc.learner.c);
  rc.learner.p = kv.get_double("regret.p", rc.learner.p);
  const double d = kv.get_double("regret.d", 1.0);
  const std::string weight = kv.get_string("regret.weight", "constant");
  const double alpha_scale = kv.get_double("regret.alpha_scale", 0.25);
  rc.fit_lo = static_cast<std::size_t>(kv.get_int("regret.fit_lo", static_cast<long long>(rc.fit_lo)));
  rc.fit_hi = static_cast<std::size_t>(kv.get_int("regret.fit_hi", 0));
  rc.seeds = parse_seeds(kv.get_string("run.seeds", "0"));
  rc.out_dir = kv.get_string("run.out_dir", rc.out_dir);
  kv.finish();

  if (!(d >= 1.0)) throw ConfigError("regret.d must be >= 1");
  if (!(rc.learner.c > 0.0)) throw ConfigError("regret.c must be > 0");
  if (!(rc.learner.p > 0.0 && rc.learner.p < 1.0)) throw ConfigError("regret.p must lie in (0, 1)");
  if (rc.episodes < 2) throw ConfigError("regret.episodes must be >= 2");
  if (rc.seeds.empty()) throw ConfigError("run.seeds must not be empty");
  if (rc.fit_hi == 0) rc.fit_hi = rc.episodes;
  if (!(rc.fit_lo >= 1 && rc.fit_lo < rc.fit_hi && rc.fit_hi <= rc.episodes))
    throw ConfigError("regret.fit_lo/fit_hi must satisfy 1 <= fit_lo < fit_hi <= regret.episodes");
  if (weight == "constant") {
    rc.learner.weight = tabular::BonusWeight::constant(d);
  } else if (weight == "resource_aware") {
    if (!(alpha_scale > 0.0)) throw ConfigError("regret.alpha_scale must be > 0");
    rc.learner.weight =
        tabular::BonusWeight::resource_aware(d, alpha_scale * rc.initial_resource, rc.initial_resource);
  } else {
    throw ConfigError("regret.weight must be 'constant' or 'resource_aware', got '" + weight + "'");
  }
  if (rc.gridworld_file.empty() && (rc.states < 2 || rc.horizon < 1))
    throw ConfigError("gridworld.states must be >= 2 and gridworld.horizon >= 1");
  return rc;
}

struct RegretOutcome {
  std::uint64_t seed = 0;
  double exponent = 0.0;
  double final_cumulative_regret = 0.0;
};

/// Writes out/seed<N>/regret.csv per seed and out/regret_summary.csv with the
/// log-log growth exponent of cumulative regret over [fit_lo, fit_hi].
inline std::vector<RegretOutcome> run_regret(const RegretConfig& rc, const std::filesystem::path& out,
                                             std::size_t workers = worker_count()) {
  const auto spec = rc.gridworld();
  spec.validate();
  std::vector<RegretOutcome> outcomes(rc.seeds.size());
  parallel_for(rc.seeds.size(), workers, [&](std::size_t i) {
    const auto records = tabular::run_regret_experiment(spec, rc.learner, rc.episodes, rc.seeds[i]);
    outcomes[i] = {rc.seeds[i], tabular::regret_growth_exponent(records, rc.fit_lo, rc.fit_hi),
                   records.back().cumulative_regret};
    auto csv = open_output(out / ("seed" + std::to_string(rc.seeds[i])) / "regret.csv");
    tabular::write_regret_csv(csv, records);
  });
  auto summary = open_output(out / "regret_summary.csv");
  summary << kSchemaLine << "\n# exponent = least-squares slope of log cumulative regret vs log episode over ["
          << rc.fit_lo << ", " << rc.fit_hi << "]\nseed,exponent,cumulative_regret\n";
  for (const auto& o : outcomes) summary << o.seed << ',' << fmt(o.exponent) << ',' << fmt(o.final_cumulative_regret) << '\n';
  return outcomes;
}

}  // namespace r3l::harness
