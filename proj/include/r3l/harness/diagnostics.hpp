#pragma once

// Per-episode diagnostics computed from EpisodeLog alone.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

#include "r3l/core.hpp"
#include "r3l/envs.hpp"

namespace r3l::harness {

/// First step (1-based) after which any resource is 0; the episode length if never.
inline std::size_t steps_to_exhaustion(const EpisodeLog& log) {
  for (std::size_t t = 0; t < log.transitions.size(); ++t) {
    const auto& r = log.transitions[t].next_state.resources;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] <= 0.0) return t + 1;
    }
  }
  return log.transitions.size();
}

/// Mean steps-to-exhaustion over episodes.
inline double exhaustion_stats(const std::vector<EpisodeLog>& logs) {
  require(!logs.empty(), "exhaustion_stats() needs at least one episode");
  double total = 0.0;
  for (const auto& log : logs) total += static_cast<double>(steps_to_exhaustion(log));
  return total / static_cast<double>(logs.size());
}

struct HeightStats {
  double max_height_any = 0.0;
  double max_height_pre_exhaustion = 0.0;
};

/// Max track height over the episode, and over the prefix visited while
/// every resource was still positive.
inline HeightStats height_stats(const EpisodeLog& log) {
  HeightStats h{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  if (log.transitions.empty()) return {0.0, 0.0};
  bool exhausted = false;
  auto visit = [&](const R3LState& s) {
    const double height = track_height(s.observation[0]);
    h.max_height_any = std::max(h.max_height_any, height);
    for (double r : s.resources.values()) exhausted = exhausted || r <= 0.0;
    if (!exhausted) h.max_height_pre_exhaustion = std::max(h.max_height_pre_exhaustion, height);
  };
  visit(log.transitions.front().state);
  for (const auto& t : log.transitions) visit(t.next_state);
  if (!std::isfinite(h.max_height_pre_exhaustion)) h.max_height_pre_exhaustion = h.max_height_any;
  h.max_height_pre_exhaustion = std::min(h.max_height_pre_exhaustion, h.max_height_any);
  return h;
}

struct UnloadPoint {
  double position = 0.0;
  double velocity = 0.0;
  double amount = 0.0;
};

/// (position, velocity) of every step where goods decreased. The goods slot
/// is `goods_index` of the resource vector. An unload is attributed to the
/// state it was taken from.
inline std::vector<UnloadPoint> scatter_unloads(const std::vector<EpisodeLog>& logs, Variant variant,
                                                std::ostream* warn = &std::cerr) {
  std::vector<UnloadPoint> points;
  if (variant != Variant::Delivery && variant != Variant::ElectricDelivery) {
    if (warn) *warn << "warning: scatter requested for a variant without goods; no points\n";
    return points;
  }
  const std::size_t goods = variant == Variant::ElectricDelivery ? 1 : 0;
  for (const auto& log : logs) {
    for (const auto& t : log.transitions) {
      const double before = t.state.resources[goods];
      const double after = t.next_state.resources[goods];
      if (after < before) {
        points.push_back({t.state.observation[0], t.state.observation[1], before - after});
      }
    }
  }
  return points;
}

}  // namespace r3l::harness
