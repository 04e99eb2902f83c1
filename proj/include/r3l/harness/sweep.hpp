#pragma once

// Cartesian override grids over a base configuration, run across seeds with a
// bounded worker pool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <exception>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "r3l/harness/config.hpp"
#include "r3l/harness/output.hpp"
#include "r3l/harness/train.hpp"

namespace r3l::harness {

/// One grid axis: a config key and the values it takes.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

using Grid = std::vector<GridAxis>;

inline constexpr const char* kSweepPrefix = "sweep.";

/// Moves every "sweep.<key> = v1, v2, ..." entry out of `kv` into a grid.
/// Values that are themselves lists are separated with '|' instead.
inline Grid extract_grid(KeyValues& kv) {
  Grid grid;
  KeyValues rest;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind(kSweepPrefix, 0) == 0) {
      const char sep = v.find('|') != std::string::npos ? '|' : ',';
      grid.push_back({k.substr(std::char_traits<char>::length(kSweepPrefix)), split_list(v, sep)});
    } else {
      rest.set(k, v);
    }
  }
  kv = rest;
  return grid;
}

/// Rejects empty grids, empty axes, duplicate axes, axes that also appear in
/// the base config, and axes over the seed list.
inline void validate_grid(const Grid& grid, const KeyValues& base) {
  if (grid.empty()) throw ConfigError("sweep grid is empty (add sweep.<key> = v1, v2, ...)");
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& axis : grid) {
    if (axis.values.empty()) problems.push_back(axis.key + " (grid axis has no values)");
    if (!seen.insert(axis.key).second) problems.push_back(axis.key + " (grid axis given twice)");
    if (base.has(axis.key)) problems.push_back(axis.key + " (set both in the base config and the grid)");
    if (axis.key == "run.seeds" || axis.key == "run.out_dir")
      problems.push_back(axis.key + " (cannot be swept)");
  }
  if (!problems.empty()) {
    std::string msg = "conflicting sweep grid:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

/// Row-major enumeration of the grid; the last axis varies fastest.
inline std::vector<std::vector<std::pair<std::string, std::string>>> grid_cells(const Grid& grid) {
  std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
  for (const auto& axis : grid) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& cell : cells) {
      for (const auto& v : axis.values) {
        auto c = cell;
        c.emplace_back(axis.key, v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

inline std::string cell_name(std::size_t index, const std::vector<std::pair<std::string, std::string>>& cell) {
  std::string name = "cell" + std::to_string(index);
  for (const auto& [k, v] : cell) {
    name += "_" + k + "=" + v;
  }
  for (char& ch : name) {
    if (ch == '/' || ch == ' ' || ch == ',') ch = '-';
  }
  return name;
}

/// Worker count from R3L_WORKERS, else the hardware concurrency; at least 1.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("R3L_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("R3L_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `jobs` indices on up to `workers` threads. The first exception thrown
/// by `fn` is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t jobs, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex guard;
  auto loop = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
        next = jobs;
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  }
  if (first) std::rethrow_exception(first);
}

struct SweepRun {
  std::size_t cell = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double final_eval_return = std::numeric_limits<double>::quiet_NaN();
  double steps_to_exhaustion = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct SweepCellSummary {
  std::size_t cell = 0;
  std::vector<std::pair<std::string, std::string>> assignment;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepCellSummary> cells;
};

/// Each (cell, seed) writes to out/<cell name>/seed<seed>/. A run that throws
/// becomes a failure row; cells whose configuration does not validate are
/// rejected before anything runs.
inline SweepResult sweep(const KeyValues& base, const Grid& grid, const std::filesystem::path& out,
                         std::size_t workers = worker_count()) {
  validate_grid(grid, base);
  const auto cells = grid_cells(grid);
  std::vector<RunConfig> configs;
  for (const auto& cell : cells) {
    KeyValues kv = base;
    for (const auto& [k, v] : cell) kv.set(k, v);
    configs.push_back(run_config_from(kv));
  }

  SweepResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto seed : configs[c].seeds) {
      SweepRun run;
      run.cell = c;
      run.seed = seed;
      result.runs.push_back(run);
    }
  }
  parallel_for(result.runs.size(), workers, [&](std::size_t i) {
    SweepRun& run = result.runs[i];
    const auto dir = out / cell_name(run.cell, cells[run.cell]) / ("seed" + std::to_string(run.seed));
    try {
      const auto r = train(configs[run.cell], run.seed, dir);
      run.final_eval_return = r.final_eval_return();
      run.steps_to_exhaustion = r.mean_steps_to_exhaustion();
      run.ok = true;
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepCellSummary s{c, cells[c]};
    std::vector<double> finals;
    for (const auto& run : result.runs) {
      if (run.cell != c) continue;
      if (run.ok) {
        finals.push_back(run.final_eval_return);
      } else {
        ++s.failed;
      }
    }
    s.completed = finals.size();
    if (!finals.empty()) {
      double sum = 0.0;
      for (double f : finals) sum += f;
      s.mean = sum / static_cast<double>(finals.size());
      double ss = 0.0;
      for (double f : finals) ss += (f - s.mean) * (f - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(finals.size()));
    }
    result.cells.push_back(s);
  }

  auto runs_csv = open_output(out / "runs.csv");
  runs_csv << kSchemaLine << "\ncell,seed,status,final_eval_return,steps_to_exhaustion,error\n";
  for (const auto& r : result.runs) {
    std::string err = r.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    runs_csv << r.cell << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << fmt(r.final_eval_return)
             << ',' << fmt(r.steps_to_exhaustion) << ',' << err << '\n';
  }
  auto summary = open_output(out / "summary.csv");
  summary << kSchemaLine << "\n# final_eval mean and population std over completed seeds\ncell";
  for (const auto& axis : grid) summary << ',' << axis.key;
  summary << ",completed,failed,final_eval_mean,final_eval_std\n";
  for (const auto& s : result.cells) {
    summary << s.cell;
    for (const auto& [k, v] : s.assignment) {
      std::string cell = v;
      std::replace(cell.begin(), cell.end(), ',', ';');
      summary << ',' << cell;
    }
    summary << ',' << s.completed << ',' << s.failed << ',' << fmt(s.mean) << ',' << fmt(s.std) << '\n';
  }
  return result;
}

}  // namespace r3l::harness
