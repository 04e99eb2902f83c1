#pragma once

// Mountain Car resource variants and a finite episodic resource gridworld.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "r3l/core.hpp"

namespace r3l {

enum class Variant { Electric, Delivery, ElectricDelivery, Gridworld };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::Electric: return "electric";
    case Variant::Delivery: return "delivery";
    case Variant::ElectricDelivery: return "electric_delivery";
    case Variant::Gridworld: return "gridworld";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "electric") return Variant::Electric;
  if (s == "delivery") return Variant::Delivery;
  if (s == "electric_delivery") return Variant::ElectricDelivery;
  if (s == "gridworld") return Variant::Gridworld;
  throw ConfigError("unknown env variant '" + s + "'");
}

/// Continuous mountain car constants. Overridable through EnvConfig.
struct MountainCarPhysics {
  double power = 0.0015;
  double gravity = 0.0025;
  double min_position = -1.2;
  double max_position = 0.6;
  double max_speed = 0.07;
  double goal_position = 0.45;
  double start_low = -0.6;
  double start_high = -0.4;
};

struct EnvConfig {
  Variant variant = Variant::Delivery;
  double initial_electricity = 12.0;
  double initial_goods = 10.0;
  int max_steps = 1000;
  double electricity_cost_scale = 0.1;
  double goal_reward_base = 100.0;
  MountainCarPhysics physics;

  bool uses_electricity() const {
    return variant == Variant::Electric || variant == Variant::ElectricDelivery;
  }
  bool uses_goods() const {
    return variant == Variant::Delivery || variant == Variant::ElectricDelivery;
  }

  /// Resource ordering is [electricity, goods] restricted to those in use.
  std::vector<double> initial_resources() const {
    std::vector<double> r;
    if (uses_electricity()) r.push_back(initial_electricity);
    if (uses_goods()) r.push_back(initial_goods);
    return r;
  }

  std::size_t resource_dim() const { return initial_resources().size(); }
  std::size_t action_dim() const { return uses_goods() ? 2 : 1; }
  std::size_t observation_dim() const { return 2; }

  void validate() const {
    if (variant == Variant::Gridworld) throw ConfigError("gridworld is configured by a GridworldSpec");
    if (uses_electricity() && !(initial_electricity > 0.0))
      throw ConfigError("env.initial_electricity must be > 0");
    if (uses_goods() && !(initial_goods > 0.0)) throw ConfigError("env.initial_goods must be > 0");
    if (max_steps < 1) throw ConfigError("env.max_steps must be >= 1");
    if (!(electricity_cost_scale >= 0.0)) throw ConfigError("env.electricity_cost_scale must be >= 0");
  }
};

/// 0.1 * ||a||^2 over the motor components only.
inline double electricity_cost(std::span<const double> motor_action, double scale = 0.1) {
  double sq = 0.0;
  for (double x : motor_action) sq += x * x;
  return scale * sq;
}

/// Height of the track at `position` (same curve the gravity term derives from).
inline double track_height(double position) { return std::sin(3.0 * position) * 0.45 + 0.55; }

/// Mountain car with resource accounting. Observation is [position, velocity].
class MountainCar {
 public:
  explicit MountainCar(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

  const EnvConfig& config() const { return config_; }
  const R3LState& state() const { return state_; }
  bool done() const { return done_; }
  int steps() const { return t_; }

  R3LState reset(RandomStream& rng) {
    const auto& p = config_.physics;
    state_ = R3LState{{rng.uniform(p.start_low, p.start_high), 0.0},
                      ResourceVector(config_.initial_resources())};
    t_ = 0;
    done_ = false;
    return state_;
  }

  /// Action layout: [force] or [force, unload]. Force is clipped to [-1, 1];
  /// the unload component is clipped into [0, remaining goods].
  std::vector<double> project_action(std::span<const double> raw) const {
    return project_action(state_, raw);
  }

  std::vector<double> project_action(const R3LState& s, std::span<const double> raw) const {
    require(raw.size() == config_.action_dim(), "action dimension mismatch");
    std::vector<double> a(raw.begin(), raw.end());
    a[0] = std::clamp(a[0], -1.0, 1.0);
    if (config_.uses_goods()) a[1] = std::clamp(a[1], 0.0, goods(s));
    return a;
  }

  Transition step(std::span<const double> action) {
    require(!done_, "step() called on a finished episode");
    require(action.size() == config_.action_dim(), "action dimension mismatch");
    const auto& p = config_.physics;
    const double force = action[0];
    require(force >= -1.0 && force <= 1.0, "force outside [-1, 1]; project first");
    const double unload = config_.uses_goods() ? action[1] : 0.0;
    if (config_.uses_goods()) {
      require(unload >= 0.0 && unload <= goods(state_), "unload outside [0, goods]; project first");
    }

    Transition tr;
    tr.state = state_;
    tr.action.assign(action.begin(), action.end());

    double position = state_.observation[0];
    double velocity = state_.observation[1];
    velocity += force * p.power - p.gravity * std::cos(3.0 * position);
    velocity = std::clamp(velocity, -p.max_speed, p.max_speed);
    position += velocity;
    position = std::clamp(position, p.min_position, p.max_position);
    if (position == p.min_position && velocity < 0.0) velocity = 0.0;

    const bool at_goal = position >= p.goal_position;
    std::vector<double> res = state_.resources.vec();
    bool terminal = false;
    double reward = 0.0;

    switch (config_.variant) {
      case Variant::Electric: {
        const double remaining = res[0] - electricity_cost(action.first(1), config_.electricity_cost_scale);
        res[0] = std::max(0.0, remaining);
        if (at_goal) {
          reward = config_.goal_reward_base +
                   config_.goal_reward_base * res[0] / config_.initial_electricity;
        }
        terminal = at_goal || remaining <= 0.0;
        break;
      }
      case Variant::Delivery: {
        res[0] = std::max(0.0, res[0] - unload);
        if (at_goal) reward = config_.goal_reward_base * unload;
        terminal = at_goal && res[0] <= 0.0;
        break;
      }
      case Variant::ElectricDelivery: {
        const double remaining = res[0] - electricity_cost(action.first(1), config_.electricity_cost_scale);
        res[0] = std::max(0.0, remaining);
        res[1] = std::max(0.0, res[1] - unload);
        const bool delivered = at_goal && unload > 0.0;
        if (delivered) {
          reward = config_.goal_reward_base +
                   config_.goal_reward_base * res[0] / config_.initial_electricity;
        }
        terminal = delivered || remaining <= 0.0;
        break;
      }
      case Variant::Gridworld: throw ContractViolation("MountainCar cannot run the gridworld variant");
    }

    ++t_;
    state_ = R3LState{{position, velocity}, ResourceVector(std::move(res))};
    tr.reward = reward;
    tr.next_state = state_;
    tr.terminal = terminal;
    tr.truncated = !terminal && t_ >= config_.max_steps;
    done_ = tr.terminal || tr.truncated;
    return tr;
  }

  /// Index of the goods slot in the resource vector, if any.
  std::size_t goods_index() const { return config_.uses_electricity() ? 1 : 0; }

  /// Initial (maximum) quantity of each resource, in resource-vector order.
  ResourceVector resource_max() const { return ResourceVector(config_.initial_resources()); }

 private:
  double goods(const R3LState& s) const { return s.resources[goods_index()]; }

  EnvConfig config_;
  R3LState state_;
  int t_ = 0;
  bool done_ = true;
};

// ---------------------------------------------------------------------------
// Tabular episodic gridworld
// ---------------------------------------------------------------------------

/// Finite episodic MDP with a single non-replenishable resource layer.
/// Arrays are dense and row-major: transition[h][s][a][s'], reward[h][s][a],
/// resource_cost[s][a].
struct GridworldSpec {
  std::size_t S = 0;
  std::size_t A = 0;
  std::size_t H = 0;
  std::vector<double> transition;
  std::vector<double> reward;
  std::vector<double> resource_cost;
  double initial_resource = 0.0;
  std::size_t initial_state = 0;

  std::size_t sa(std::size_t s, std::size_t a) const { return s * A + a; }
  std::size_t hsa(std::size_t h, std::size_t s, std::size_t a) const { return (h * S + s) * A + a; }

  std::span<const double> next_distribution(std::size_t h, std::size_t s, std::size_t a) const {
    return std::span<const double>(transition).subspan(hsa(h, s, a) * S, S);
  }
  double r(std::size_t h, std::size_t s, std::size_t a) const { return reward[hsa(h, s, a)]; }
  double cost(std::size_t s, std::size_t a) const { return resource_cost[sa(s, a)]; }

  void validate() const {
    if (S == 0 || A == 0 || H == 0) throw ConfigError("gridworld needs S, A, H >= 1");
    if (transition.size() != H * S * A * S) throw ConfigError("gridworld transition array has wrong size");
    if (reward.size() != H * S * A) throw ConfigError("gridworld reward array has wrong size");
    if (resource_cost.size() != S * A) throw ConfigError("gridworld resource_cost array has wrong size");
    if (initial_state >= S) throw ConfigError("gridworld initial_state out of range");
    if (!(initial_resource >= 0.0)) throw ConfigError("gridworld initial_resource must be >= 0");
    for (std::size_t i = 0; i < H * S * A; ++i) {
      auto row = std::span<const double>(transition).subspan(i * S, S);
      double total = 0.0;
      for (double p : row) {
        if (p < 0.0) throw ConfigError("gridworld transition probability < 0");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ConfigError("gridworld transition row does not sum to 1");
    }
    for (double x : reward) {
      if (x < 0.0 || x > 1.0) throw ConfigError("gridworld reward outside [0, 1]");
    }
    for (double c : resource_cost) {
      if (c < 0.0) throw ConfigError("gridworld resource cost < 0");
    }
  }
};

struct GridworldOutcome {
  std::size_t next_state = 0;
  double reward = 0.0;
  double resource_after = 0.0;
};

/// One step of the gridworld. An action whose cost exceeds the remaining
/// resource is infeasible: its consumption is clipped and it earns no reward.
inline GridworldOutcome gridworld_step(const GridworldSpec& spec, std::size_t h, std::size_t s,
                                       std::size_t a, double resource, RandomStream& rng) {
  require(h < spec.H && s < spec.S && a < spec.A, "gridworld index out of range");
  GridworldOutcome out;
  out.next_state = rng.categorical(spec.next_distribution(h, s, a));
  const double cost = spec.cost(s, a);
  const bool affordable = resource >= cost;
  out.reward = affordable ? spec.r(h, s, a) : 0.0;
  out.resource_after = std::max(0.0, resource - cost);
  return out;
}

namespace chain_action {
inline constexpr std::size_t left = 0;
inline constexpr std::size_t right = 1;
inline constexpr std::size_t stay = 2;
inline constexpr std::size_t consume = 3;
}  // namespace chain_action

/// Deterministic chain: `S` states, actions {left, right, stay, consume}.
/// Consuming costs one resource unit and pays 1 only at the far end, which
/// is reachable exactly on the last step when S == H.
inline GridworldSpec default_chain(std::size_t S = 10, std::size_t H = 10, double initial_resource = 3.0) {
  GridworldSpec g;
  g.S = S;
  g.A = 4;
  g.H = H;
  g.initial_resource = initial_resource;
  g.transition.assign(H * S * g.A * S, 0.0);
  g.reward.assign(H * S * g.A, 0.0);
  g.resource_cost.assign(S * g.A, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t dest[4] = {s == 0 ? 0 : s - 1, std::min(s + 1, S - 1), s, s};
      for (std::size_t a = 0; a < g.A; ++a) g.transition[g.hsa(h, s, a) * S + dest[a]] = 1.0;
      if (s == S - 1) g.reward[g.hsa(h, s, chain_action::consume)] = 1.0;
    }
  }
  for (std::size_t s = 0; s < S; ++s) g.resource_cost[g.sa(s, chain_action::consume)] = 1.0;
  return g;
}

/// Random MDP with Dirichlet-like kernels and uniform rewards.
inline GridworldSpec random_gridworld(std::size_t S, std::size_t A, std::size_t H, RandomStream& rng) {
  GridworldSpec g;
  g.S = S;
  g.A = A;
  g.H = H;
  g.initial_resource = 0.0;
  g.transition.assign(H * S * A * S, 0.0);
  g.reward.assign(H * S * A, 0.0);
  g.resource_cost.assign(S * A, 0.0);
  for (std::size_t i = 0; i < H * S * A; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      const double w = -std::log(1.0 - rng.uniform());
      g.transition[i * S + j] = w;
      total += w;
    }
    for (std::size_t j = 0; j < S; ++j) g.transition[i * S + j] /= total;
    g.reward[i] = rng.uniform();
  }
  return g;
}

// JSON file format: {"format": "r3l-gridworld", "version": 1, "S", "A", "H",
// "initial_state", "initial_resource", "transition": [H*S*A*S],
// "reward": [H*S*A], "resource_cost": [S*A]}; arrays are row-major.

inline nlohmann::json to_json(const GridworldSpec& g) {
  return nlohmann::json{{"format", "r3l-gridworld"},
                        {"version", 1},
                        {"S", g.S},
                        {"A", g.A},
                        {"H", g.H},
                        {"initial_state", g.initial_state},
                        {"initial_resource", g.initial_resource},
                        {"transition", g.transition},
                        {"reward", g.reward},
                        {"resource_cost", g.resource_cost}};
}

inline GridworldSpec gridworld_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != "r3l-gridworld") throw ConfigError("not an r3l-gridworld file");
    GridworldSpec g;
    g.S = j.at("S").get<std::size_t>();
    g.A = j.at("A").get<std::size_t>();
    g.H = j.at("H").get<std::size_t>();
    g.initial_state = j.value("initial_state", std::size_t{0});
    g.initial_resource = j.value("initial_resource", 0.0);
    g.transition = j.at("transition").get<std::vector<double>>();
    g.reward = j.at("reward").get<std::vector<double>>();
    g.resource_cost = j.at("resource_cost").get<std::vector<double>>();
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed gridworld file: ") + e.what());
  }
}

inline void save_gridworld(const GridworldSpec& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(g).dump(1) << '\n';
}

inline GridworldSpec load_gridworld(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed gridworld file: ") + e.what());
  }
  return gridworld_from_json(j);
}

}  // namespace r3l
