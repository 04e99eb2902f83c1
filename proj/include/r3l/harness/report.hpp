#pragma once

// Post-hoc summaries of run directories: learning curves, height curves,
// unload scatters and a plain-text digest.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "r3l/envs.hpp"
#include "r3l/harness/config.hpp"
#include "r3l/harness/output.hpp"

namespace r3l::harness {

struct RunDigest {
  std::string label;
  std::size_t episodes = 0;
  double final_eval_return = std::numeric_limits<double>::quiet_NaN();
  double mean_steps_to_exhaustion = std::numeric_limits<double>::quiet_NaN();
  double mean_extrinsic_return = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::vector<double> column_values(const CsvTable& t, const std::string& name) {
  std::vector<double> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) out.push_back(t.number(i, name));
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

}  // namespace detail

/// Reads metrics.csv and eval.csv from each run directory and writes
/// eval_curve.svg, episode_returns.svg, max_height.svg and report.txt to `out`.
/// Curves are displayed with a centered moving average of window 10.
inline std::vector<RunDigest> report(const std::vector<std::filesystem::path>& run_dirs,
                                     const std::filesystem::path& out) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  std::vector<Series> eval_curves, returns, heights_any, heights_pre;
  std::vector<RunDigest> digests;
  for (const auto& dir : run_dirs) {
    const auto metrics = read_csv(dir / "metrics.csv");
    const auto evals = read_csv(dir / "eval.csv");
    RunDigest d;
    d.label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    if (d.label.rfind("seed", 0) == 0 && dir.has_parent_path()) {
      d.label = dir.parent_path().filename().string() + "/" + d.label;
    }
    d.episodes = metrics.rows.size();

    const auto ev_steps = detail::column_values(evals, "step");
    const auto ev = detail::column_values(evals, "eval_return");
    if (!ev.empty()) d.final_eval_return = ev.back();
    eval_curves.push_back({d.label, ev_steps, ev});

    const auto ep_steps = detail::column_values(metrics, "step");
    const auto ret = detail::column_values(metrics, "extrinsic_return");
    d.mean_extrinsic_return = detail::mean_of(ret);
    d.mean_steps_to_exhaustion = detail::mean_of(detail::column_values(metrics, "steps_to_exhaustion"));
    returns.push_back({d.label, ep_steps, moving_average(ret)});
    heights_pre.push_back({d.label + " before exhaustion", ep_steps,
                           moving_average(detail::column_values(metrics, "max_height_pre_exhaustion"))});
    heights_any.push_back({d.label + " any", ep_steps,
                           moving_average(detail::column_values(metrics, "max_height_any")), true});
    digests.push_back(d);
  }

  std::vector<Series> heights = heights_pre;
  heights.insert(heights.end(), heights_any.begin(), heights_any.end());
  detail::write_text(out / "eval_curve.svg",
                     line_chart_svg(eval_curves, "Greedy evaluation return", "training step", "mean eval return"));
  detail::write_text(out / "episode_returns.svg",
                     line_chart_svg(returns, "Training episode return (moving average 10)", "training step",
                                    "extrinsic return"));
  detail::write_text(out / "max_height.svg",
                     line_chart_svg(heights, "Max height per episode (moving average 10)", "training step",
                                    "max track height"));

  auto txt = open_output(out / "report.txt");
  txt << "# eval return = mean extrinsic return over the configured number of greedy evaluation episodes\n"
      << "# at the last evaluation checkpoint; curves are smoothed for display only\n"
      << "run,episodes,final_eval_return,mean_extrinsic_return,mean_steps_to_exhaustion\n";
  for (const auto& d : digests) {
    txt << d.label << ',' << d.episodes << ',' << fmt(d.final_eval_return) << ',' << fmt(d.mean_extrinsic_return)
        << ',' << fmt(d.mean_steps_to_exhaustion) << '\n';
  }
  return digests;
}

/// Collects unload points from each run's unloads.csv into points.csv and
/// scatter.svg. Runs without goods contribute nothing and trigger a warning.
inline std::size_t scatter_report(const std::vector<std::filesystem::path>& run_dirs,
                                  const std::filesystem::path& out, std::ostream* warn = &std::cerr) {
  if (run_dirs.empty()) throw ConfigError("scatter needs at least one run directory");
  std::vector<double> xs, ys;
  auto points = open_output(out / "points.csv");
  points << kSchemaLine << "\nrun,position,velocity,amount\n";
  MountainCarPhysics physics;
  for (const auto& dir : run_dirs) {
    const auto conf = dir / "config.txt";
    if (std::filesystem::exists(conf)) {
      const auto kv = KeyValues::load(conf.string());
      const auto variant = parse_variant(kv.get_string("env.variant", "delivery"));
      if (variant != Variant::Delivery && variant != Variant::ElectricDelivery) {
        if (warn) *warn << "warning: " << dir.string() << " has no goods; no unload points\n";
        continue;
      }
      physics.min_position = kv.get_double("env.physics.min_position", physics.min_position);
      physics.max_position = kv.get_double("env.physics.max_position", physics.max_position);
      physics.max_speed = kv.get_double("env.physics.max_speed", physics.max_speed);
    }
    const auto file = dir / "unloads.csv";
    if (!std::filesystem::exists(file)) {
      if (warn) *warn << "warning: " << dir.string() << " has no unloads.csv; no unload points\n";
      continue;
    }
    const auto t = read_csv(file);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const double p = t.number(i, "position"), v = t.number(i, "velocity");
      xs.push_back(p);
      ys.push_back(v);
      points << dir.string() << ',' << fmt(p) << ',' << fmt(v) << ',' << fmt(t.number(i, "amount")) << '\n';
    }
  }
  detail::write_text(out / "scatter.svg",
                     scatter_svg(xs, ys, "States where goods were unloaded", "position", "velocity",
                                 physics.min_position, physics.max_position, -physics.max_speed,
                                 physics.max_speed));
  return xs.size();
}

}  // namespace r3l::harness
