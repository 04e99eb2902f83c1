#pragma once

// The shaped-reward training loop: act, project, step, score surprise, shape,
// learn, update the dynamics model; periodic greedy evaluation.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "r3l/agent.hpp"
#include "r3l/core.hpp"
#include "r3l/envs.hpp"
#include "r3l/harness/config.hpp"
#include "r3l/harness/diagnostics.hpp"
#include "r3l/harness/output.hpp"
#include "r3l/nn.hpp"
#include "r3l/raeb.hpp"
#include "r3l/surprise.hpp"

namespace r3l::harness {

struct EpisodeRow {
  std::size_t step = 0;  // global step at which the episode ended
  std::size_t episode = 0;
  std::size_t length = 0;
  double extrinsic_return = 0.0;
  double shaped_return = 0.0;
  double g_mean = 0.0;
  double bonus_mean = 0.0;
  double bonus_raw_mean = 0.0;
  double electricity_at_end = std::numeric_limits<double>::quiet_NaN();
  double goods_at_end = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps_to_exhaustion = 0;
  double max_height_any = 0.0;
  double max_height_pre_exhaustion = 0.0;
  bool terminal = false;
};

struct EvalRow {
  std::size_t step = 0;
  double eval_return = 0.0;
  double eval_return_std = 0.0;
  std::size_t episodes = 0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> episodes;
  std::vector<EvalRow> evals;
  std::vector<UnloadPoint> unloads;
  agent::QTable q;
  std::optional<nn::MLPParams> model;

  double final_eval_return() const { return evals.empty() ? 0.0 : evals.back().eval_return; }

  double mean_steps_to_exhaustion() const {
    if (episodes.empty()) return 0.0;
    double total = 0.0;
    for (const auto& e : episodes) total += static_cast<double>(e.steps_to_exhaustion);
    return total / static_cast<double>(episodes.size());
  }
};

inline std::uint64_t eval_seed(std::uint64_t run_seed, std::size_t step) {
  return r3l::detail::mix64(run_seed * 0x9E3779B97F4A7C15ULL + step);
}

namespace detail {

inline const char* kEpisodeHeader =
    "step,episode,length,extrinsic_return,shaped_return,g_mean,bonus_mean,bonus_raw_mean,"
    "electricity_at_end,goods_at_end,steps_to_exhaustion,max_height_any,max_height_pre_exhaustion,terminal";

inline void write_episode(std::ostream& o, const EpisodeRow& r) {
  o << r.step << ',' << r.episode << ',' << r.length << ',' << fmt(r.extrinsic_return) << ','
    << fmt(r.shaped_return) << ',' << fmt(r.g_mean) << ',' << fmt(r.bonus_mean) << ',' << fmt(r.bonus_raw_mean)
    << ',' << fmt(r.electricity_at_end) << ',' << fmt(r.goods_at_end) << ',' << r.steps_to_exhaustion << ','
    << fmt(r.max_height_any) << ',' << fmt(r.max_height_pre_exhaustion) << ',' << (r.terminal ? 1 : 0) << '\n';
}

inline const char* kStepHeader =
    "step,episode,t,position,velocity,electricity,goods,force,unload,extrinsic,g,bonus_raw,bonus_emitted,total";

}  // namespace detail

/// Runs one seed. When `out_dir` is nonempty the run's files are written there:
/// config.txt, metrics.csv, eval.csv, unloads.csv (goods variants),
/// steps.csv (if log_steps), qtable.txt and model.txt (if checkpoint).
inline RunResult train(const RunConfig& cfg, std::uint64_t seed, const std::filesystem::path& out_dir = {}) {
  cfg.validate();
  const RandomStream root = seeded_rng(seed);
  RandomStream env_rng = root.split("env");
  RandomStream agent_rng = root.split("agent");
  RandomStream model_rng = root.split("model_sampling");

  MountainCar env(cfg.env);
  agent::QAgent learner(cfg.env, cfg.agent);
  const bool uses_bonus = raeb::uses_bonus(cfg.raeb.mode);
  std::optional<surprise::SurpriseModel> model;
  if (uses_bonus) {
    model.emplace(cfg.env.observation_dim(), cfg.env.action_dim(), cfg.env.resource_dim(), cfg.surprise,
                  root.split("model_init"));
  }

  const bool writing = !out_dir.empty();
  std::ofstream metrics, evals, steps_out;
  if (writing) {
    std::filesystem::create_directories(out_dir);
    auto conf = open_output(out_dir / "config.txt");
    conf << describe(cfg) << "run.seed = " << seed << '\n';
    metrics = open_output(out_dir / "metrics.csv");
    metrics << kSchemaLine << "\n# values are %.17g round-trip exact; bonus_mean is weighted by g so that\n"
            << "# shaped_return - extrinsic_return = beta * g_mean * bonus_mean * length (beta = " << fmt(cfg.raeb.beta)
            << ", modes full, surprise_only, coefficient_only; relative error ~1e-12)\n"
            << detail::kEpisodeHeader << '\n';
    evals = open_output(out_dir / "eval.csv");
    evals << kSchemaLine << "\n# eval_return is the mean extrinsic return of greedy episodes\n"
          << "step,eval_return,eval_return_std,episodes\n";
    if (cfg.log_steps) {
      steps_out = open_output(out_dir / "steps.csv");
      steps_out << kSchemaLine << "\n# total = extrinsic + intrinsic; full mode: intrinsic = beta * g * bonus_emitted"
                << " (beta = " << fmt(cfg.raeb.beta) << ")\n"
                << detail::kStepHeader << '\n';
    }
  }

  const bool has_elec = cfg.env.uses_electricity();
  const bool has_goods = cfg.env.uses_goods();
  const std::size_t goods_idx = has_elec ? 1 : 0;

  RunResult result;
  result.seed = seed;
  EpisodeLog log;
  log.seed = seed;
  double ext_sum = 0.0, shaped_sum = 0.0, raw_sum = 0.0;
  std::size_t episode = 0;

  auto finish_episode = [&](std::size_t step, bool terminal) {
    EpisodeRow row;
    row.step = step;
    row.episode = episode;
    row.length = log.transitions.size();
    row.extrinsic_return = ext_sum;
    row.shaped_return = shaped_sum;
    const double n = static_cast<double>(std::max<std::size_t>(row.length, 1));
    double weighted = 0.0;
    for (std::size_t i = 0; i < log.transitions.size(); ++i) {
      row.g_mean += log.coefficients[i];
      weighted += log.coefficients[i] * log.bonuses[i];
    }
    row.bonus_mean = row.g_mean > 0.0 ? weighted / row.g_mean : 0.0;
    row.g_mean /= n;
    row.bonus_raw_mean = raw_sum / n;
    const auto& last = log.transitions.back().next_state.resources;
    if (has_elec) row.electricity_at_end = last[0];
    if (has_goods) row.goods_at_end = last[goods_idx];
    row.steps_to_exhaustion = steps_to_exhaustion(log);
    const auto hs = height_stats(log);
    row.max_height_any = hs.max_height_any;
    row.max_height_pre_exhaustion = hs.max_height_pre_exhaustion;
    row.terminal = terminal;
    if (writing) detail::write_episode(metrics, row);
    result.episodes.push_back(row);
    log.transitions.clear();
    log.bonuses.clear();
    log.coefficients.clear();
    ext_sum = shaped_sum = raw_sum = 0.0;
    ++episode;
  };

  env.reset(env_rng);
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const R3LState s = env.state();
    const double eps = cfg.agent.epsilon(step - 1, cfg.total_steps);
    const std::size_t ai = learner.select(s, eps, agent_rng);
    const std::vector<double> a = env.project_action(learner.action(ai));
    Transition tr = env.step(a);

    surprise::BonusValue bonus;
    if (model) bonus = model->score(s, a, tr.next_state);  // pre-update model
    const raeb::ShapedReward shaped = raeb::shape(tr.reward, s.resources, bonus.emitted, cfg.raeb);
    learner.observe(s, ai, tr, shaped);
    if (model) {
      model->add(s, a, tr.next_state);
      if (model->warmed_up() && step % cfg.surprise.update_interval == 0) model->update(model_rng);
    }

    if (has_goods && tr.next_state.resources[goods_idx] < s.resources[goods_idx]) {
      result.unloads.push_back(
          {s.observation[0], s.observation[1], s.resources[goods_idx] - tr.next_state.resources[goods_idx]});
    }
    if (writing && cfg.log_steps) {
      steps_out << step << ',' << episode << ',' << log.transitions.size() + 1 << ',' << fmt(s.observation[0]) << ','
                << fmt(s.observation[1]) << ',' << (has_elec ? fmt(s.resources[0]) : "nan") << ','
                << (has_goods ? fmt(s.resources[goods_idx]) : "nan") << ',' << fmt(a[0]) << ','
                << (has_goods ? fmt(a[1]) : "nan") << ',' << fmt(shaped.extrinsic) << ',' << fmt(shaped.coefficient)
                << ',' << fmt(bonus.raw) << ',' << fmt(shaped.bonus) << ',' << fmt(shaped.total) << '\n';
    }

    ext_sum += tr.reward;
    shaped_sum += shaped.total;
    raw_sum += bonus.raw;
    const bool terminal = tr.terminal;
    log.push(std::move(tr), shaped.bonus, shaped.coefficient);
    if (env.done()) {
      finish_episode(step, terminal);
      env.reset(env_rng);
    }

    if (step % cfg.eval_interval == 0) {
      const auto ev = agent::evaluate(learner.table(), learner.discretizer(), cfg.env, cfg.agent.eval_episodes,
                                      eval_seed(seed, step));
      EvalRow row{step, ev.mean_return, ev.std_return, ev.returns.size()};
      if (writing) evals << row.step << ',' << fmt(row.eval_return) << ',' << fmt(row.eval_return_std) << ','
                         << row.episodes << '\n';
      result.evals.push_back(row);
    }
  }

  result.q = learner.table();
  if (model) result.model = model->params();
  if (writing) {
    if (has_goods) {
      auto u = open_output(out_dir / "unloads.csv");
      u << kSchemaLine << "\nposition,velocity,amount\n";
      for (const auto& p : result.unloads) u << fmt(p.position) << ',' << fmt(p.velocity) << ',' << fmt(p.amount) << '\n';
    }
    if (cfg.checkpoint) {
      agent::save_qtable(result.q, (out_dir / "qtable.txt").string());
      if (model) nn::save_params(model->params(), (out_dir / "model.txt").string());
    }
  }
  return result;
}

}  // namespace r3l::harness
