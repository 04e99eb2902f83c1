#pragma once

// Discretized Q-learning agent for the mountain car resource variants. It
// learns from whatever shaped reward the caller supplies and is evaluated on
// extrinsic return only.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "r3l/core.hpp"
#include "r3l/envs.hpp"
#include "r3l/raeb.hpp"

namespace r3l::agent {

struct DiscretizerConfig {
  std::size_t position_bins = 32;
  std::size_t velocity_bins = 32;
  std::size_t resource_bins = 8;
};

/// Maps augmented mountain-car states to cells and action indices to actions.
/// Resource bin 0 holds exactly the exhausted level; positive quantities are
/// spread over the remaining bins.
class Discretizer {
 public:
  Discretizer(const EnvConfig& env, DiscretizerConfig cfg = {})
      : cfg_(cfg), physics_(env.physics), resource_max_(env.initial_resources()),
        has_unload_(env.uses_goods()) {
    require(cfg.position_bins > 0 && cfg.velocity_bins > 0 && cfg.resource_bins > 1, "bad bin counts");
    cells_ = cfg.position_bins * cfg.velocity_bins;
    for (std::size_t i = 0; i < resource_max_.size(); ++i) cells_ *= cfg.resource_bins;
    forces_ = {-1.0, -0.5, 0.0, 0.5, 1.0};
  }

  std::size_t cell_count() const { return cells_; }
  std::size_t action_count() const { return forces_.size() * (has_unload_ ? 2 : 1); }
  const DiscretizerConfig& config() const { return cfg_; }

  std::size_t cell(const R3LState& s) const {
    std::size_t idx = bin(s.observation[0], physics_.min_position, physics_.max_position, cfg_.position_bins);
    idx = idx * cfg_.velocity_bins + bin(s.observation[1], -physics_.max_speed, physics_.max_speed, cfg_.velocity_bins);
    for (std::size_t i = 0; i < resource_max_.size(); ++i) {
      idx = idx * cfg_.resource_bins + resource_bin(s.resources[i], resource_max_[i]);
    }
    return idx;
  }

  /// Action indices enumerate force first, then unload: [f0..f4 | f0..f4 + unload].
  std::vector<double> action(std::size_t index) const {
    require(index < action_count(), "action index out of range");
    std::vector<double> a{forces_[index % forces_.size()]};
    if (has_unload_) a.push_back(index >= forces_.size() ? 1.0 : 0.0);
    return a;
  }

  static std::size_t bin(double x, double lo, double hi, std::size_t n) {
    const double t = (x - lo) / (hi - lo);
    const auto b = static_cast<long>(std::floor(t * static_cast<double>(n)));
    return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(n) - 1));
  }

  std::size_t resource_bin(double r, double r_max) const {
    if (r <= 0.0) return 0;
    const auto b = static_cast<long>(std::ceil(r / r_max * static_cast<double>(cfg_.resource_bins - 1)));
    return static_cast<std::size_t>(std::clamp<long>(b, 1, static_cast<long>(cfg_.resource_bins) - 1));
  }

 private:
  DiscretizerConfig cfg_;
  MountainCarPhysics physics_;
  std::vector<double> resource_max_;
  bool has_unload_;
  std::size_t cells_ = 0;
  std::vector<double> forces_;
};

struct QTable {
  std::size_t cells = 0;
  std::size_t actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(std::size_t c, std::size_t a, double init = 0.0) : cells(c), actions(a), values(c * a, init) {}

  double& at(std::size_t cell, std::size_t a) { return values[cell * actions + a]; }
  double at(std::size_t cell, std::size_t a) const { return values[cell * actions + a]; }

  std::size_t greedy(std::size_t cell) const {
    const double* row = &values[cell * actions];
    return static_cast<std::size_t>(std::max_element(row, row + actions) - row);
  }
  double max_value(std::size_t cell) const {
    const double* row = &values[cell * actions];
    return *std::max_element(row, row + actions);
  }

  /// Order-sensitive FNV-1a over the raw bytes; used to check evaluation purity.
  std::uint64_t checksum() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
    for (std::size_t i = 0; i < values.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  bool operator==(const QTable&) const = default;
};

struct AgentConfig {
  double learning_rate = 0.1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.2;  // of total training steps
  double initial_q = 0.0;
  std::size_t eval_episodes = 10;
  DiscretizerConfig bins;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("agent.gamma must lie in (0, 1)");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("agent.learning_rate must lie in (0, 1]");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
      throw ConfigError("agent epsilon values must lie in [0, 1]");
    if (!(epsilon_fraction > 0.0 && epsilon_fraction <= 1.0))
      throw ConfigError("agent.epsilon_fraction must lie in (0, 1]");
    if (!std::isfinite(initial_q)) throw ConfigError("agent.initial_q must be finite");
    if (eval_episodes == 0) throw ConfigError("agent.eval_episodes must be >= 1");
  }

  /// Linear decay from epsilon_start to epsilon_end over the first
  /// epsilon_fraction of training.
  double epsilon(std::size_t step, std::size_t total_steps) const {
    const double horizon = epsilon_fraction * static_cast<double>(total_steps);
    if (horizon <= 0.0) return epsilon_end;
    const double t = static_cast<double>(step) / horizon;
    if (t >= 1.0) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * t;
  }
};

/// Epsilon-greedy with lowest-index tie-breaking.
inline std::size_t act(const QTable& q, std::size_t cell, double epsilon, RandomStream& rng) {
  require(cell < q.cells, "act(): cell out of range");
  if (epsilon > 0.0 && rng.uniform() < epsilon) return rng.index(q.actions);
  return q.greedy(cell);
}

/// One-step Q-learning toward shaped.total + gamma * max_a' Q(next, a');
/// no bootstrap on terminal transitions. Truncation still bootstraps.
inline void learn(QTable& q, std::size_t cell, std::size_t action, std::size_t next_cell, bool terminal,
                  const raeb::ShapedReward& shaped, const AgentConfig& cfg) {
  require(cell < q.cells && next_cell < q.cells && action < q.actions, "learn(): index out of range");
  const double bootstrap = terminal ? 0.0 : cfg.gamma * q.max_value(next_cell);
  double& v = q.at(cell, action);
  v += cfg.learning_rate * (shaped.total + bootstrap - v);
}

/// Anything the training loop can drive.
template <typename A>
concept Agent = requires(A a, const A ca, const R3LState& s, RandomStream& rng, const Transition& t,
                         const raeb::ShapedReward& r, double eps) {
  { a.select(s, eps, rng) } -> std::convertible_to<std::size_t>;
  { ca.action(std::size_t{}) } -> std::convertible_to<std::vector<double>>;
  a.observe(s, std::size_t{}, t, r);
};

/// Tabular agent bundling the discretizer, Q table and hyperparameters.
class QAgent {
 public:
  QAgent(const EnvConfig& env, AgentConfig cfg)
      : cfg_(cfg), disc_(env, cfg.bins), q_(disc_.cell_count(), disc_.action_count(), cfg.initial_q) {
    cfg_.validate();
  }

  std::size_t select(const R3LState& s, double epsilon, RandomStream& rng) const {
    return act(q_, disc_.cell(s), epsilon, rng);
  }
  std::vector<double> action(std::size_t index) const { return disc_.action(index); }
  void observe(const R3LState& s, std::size_t a, const Transition& t, const raeb::ShapedReward& r) {
    learn(q_, disc_.cell(s), a, disc_.cell(t.next_state), t.terminal, r, cfg_);
  }

  const QTable& table() const { return q_; }
  QTable& table() { return q_; }
  const Discretizer& discretizer() const { return disc_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  AgentConfig cfg_;
  Discretizer disc_;
  QTable q_;
};

static_assert(Agent<QAgent>);

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  std::vector<double> returns;
};

/// Greedy rollouts without learning or intrinsic reward.
inline EvalResult evaluate(const QTable& q, const Discretizer& disc, const EnvConfig& env_cfg, std::size_t episodes,
                           std::uint64_t seed) {
  MountainCar env(env_cfg);
  RandomStream rng = seeded_rng(seed).split("evaluate");
  EvalResult out;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(rng);
    double ret = 0.0;
    while (!env.done()) {
      const auto a = env.project_action(disc.action(q.greedy(disc.cell(env.state()))));
      ret += env.step(a).reward;
    }
    out.returns.push_back(ret);
  }
  if (!out.returns.empty()) {
    const double n = static_cast<double>(out.returns.size());
    out.mean_return = std::accumulate(out.returns.begin(), out.returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : out.returns) ss += (r - out.mean_return) * (r - out.mean_return);
    out.std_return = std::sqrt(ss / n);
  }
  return out;
}

// Q-table checkpoint (text):
//   r3l-qtable 1
//   <cells> <actions>
//   <values row-major by cell>   one per line, %.17g

inline void save_qtable(const QTable& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "r3l-qtable 1\n" << q.cells << ' ' << q.actions << '\n';
  char buf[40];
  for (double v : q.values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

inline QTable load_qtable(const std::string& path) {
  std::ifstream in(path);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "r3l-qtable" || version != 1)
    throw ConfigError("not an r3l-qtable checkpoint: " + path);
  std::size_t c = 0, a = 0;
  if (!(in >> c >> a)) throw ConfigError("truncated q-table header: " + path);
  QTable q(c, a);
  for (double& v : q.values) {
    if (!(in >> v)) throw ConfigError("truncated q-table body: " + path);
  }
  return q;
}

}  // namespace r3l::agent
