#pragma once

// Flat dotted-key configuration ("raeb.beta = 0.25", '#' comments) and the
// typed RunConfig assembled from it.

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "r3l/agent.hpp"
#include "r3l/core.hpp"
#include "r3l/envs.hpp"
#include "r3l/raeb.hpp"
#include "r3l/surprise.hpp"

namespace r3l::harness {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Ordered key -> value text map with usage tracking.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& origin = "<config>") {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (kv.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
  }

  static KeyValues parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValues load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse(in, path);
  }

  /// Applies "key=value".
  void override_with(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      bad_.push_back(key + " (expected a number, got '" + it->second + "')");
      return fallback;
    }
  }

  long long get_int(const std::string& key, long long fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      bad_.push_back(key + " (expected an integer, got '" + it->second + "')");
      return fallback;
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const std::string s = get_string(key, fallback ? "true" : "false");
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad_.push_back(key + " (expected a boolean, got '" + s + "')");
    return fallback;
  }

  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        bad_.push_back(key + " (expected a number list, got '" + it->second + "')");
        return fallback;
      }
    }
    return out;
  }

  /// Throws listing every unknown or malformed key.
  void finish() const {
    std::vector<std::string> problems = bad_;
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) problems.push_back(k + " (unknown key)");
    }
    if (!problems.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  mutable std::vector<std::string> bad_;
};

/// Parses "A..B" (inclusive) or a comma list.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const auto a = std::stoull(text.substr(0, dots));
      const auto b = std::stoull(text.substr(dots + 2));
      if (b < a) throw ConfigError("seed range " + text + " is empty");
      for (auto s = a; s <= b; ++s) seeds.push_back(s);
    } else {
      for (const auto& item : split_list(text)) seeds.push_back(std::stoull(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse seeds '" + text + "'");
  }
  return seeds;
}

struct RunConfig {
  EnvConfig env;
  agent::AgentConfig agent;
  raeb::RaebConfig raeb;
  surprise::SurpriseConfig surprise;
  std::size_t total_steps = 200000;
  std::size_t eval_interval = 10000;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "runs/default";
  bool log_steps = false;
  bool checkpoint = true;

  void validate() const {
    env.validate();
    agent.validate();
    raeb.validate();
    surprise.validate();
    if (raeb.i_max.size() != env.resource_dim())
      throw ConfigError("raeb.alpha_scale needs one entry per resource of the env variant");
    if (total_steps == 0) throw ConfigError("run.total_steps must be >= 1");
    if (eval_interval == 0) throw ConfigError("run.eval_interval must be >= 1");
    if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  }
};

/// Default alpha as a multiple of I_max: 0.25 for goods, 2.5 for electricity.
inline std::vector<double> default_alpha_scale(const EnvConfig& env) {
  std::vector<double> s;
  if (env.uses_electricity()) s.push_back(2.5);
  if (env.uses_goods()) s.push_back(0.25);
  return s;
}

inline RunConfig run_config_from(const KeyValues& kv) {
  RunConfig rc;
  auto& e = rc.env;
  e.variant = parse_variant(kv.get_string("env.variant", "delivery"));
  e.initial_electricity = kv.get_double("env.initial_electricity", e.initial_electricity);
  e.initial_goods = kv.get_double("env.initial_goods", e.initial_goods);
  e.max_steps = static_cast<int>(kv.get_int("env.max_steps", e.max_steps));
  e.electricity_cost_scale = kv.get_double("env.electricity_cost_scale", e.electricity_cost_scale);
  e.goal_reward_base = kv.get_double("env.goal_reward_base", e.goal_reward_base);
  auto& p = e.physics;
  p.power = kv.get_double("env.physics.power", p.power);
  p.gravity = kv.get_double("env.physics.gravity", p.gravity);
  p.min_position = kv.get_double("env.physics.min_position", p.min_position);
  p.max_position = kv.get_double("env.physics.max_position", p.max_position);
  p.max_speed = kv.get_double("env.physics.max_speed", p.max_speed);
  p.goal_position = kv.get_double("env.physics.goal_position", p.goal_position);
  p.start_low = kv.get_double("env.physics.start_low", p.start_low);
  p.start_high = kv.get_double("env.physics.start_high", p.start_high);

  auto& a = rc.agent;
  a.learning_rate = kv.get_double("agent.learning_rate", a.learning_rate);
  a.gamma = kv.get_double("agent.gamma", a.gamma);
  a.epsilon_start = kv.get_double("agent.epsilon_start", a.epsilon_start);
  a.epsilon_end = kv.get_double("agent.epsilon_end", a.epsilon_end);
  a.epsilon_fraction = kv.get_double("agent.epsilon_fraction", a.epsilon_fraction);
  a.initial_q = kv.get_double("agent.initial_q", a.initial_q);
  a.eval_episodes = static_cast<std::size_t>(kv.get_int("agent.eval_episodes", static_cast<long long>(a.eval_episodes)));
  a.bins.position_bins = static_cast<std::size_t>(kv.get_int("agent.bins.position", 32));
  a.bins.velocity_bins = static_cast<std::size_t>(kv.get_int("agent.bins.velocity", 32));
  a.bins.resource_bins = static_cast<std::size_t>(kv.get_int("agent.bins.resource", 8));

  const double beta = kv.get_double("raeb.beta", 0.25);
  const auto alpha_scale = kv.get_doubles("raeb.alpha_scale", default_alpha_scale(e));
  const auto mode = raeb::parse_mode(kv.get_string("raeb.mode", "full"));
  const double c = kv.get_double("raeb.c", 1.0);

  auto& s = rc.surprise;
  s.batch_size = static_cast<std::size_t>(kv.get_int("surprise.batch_size", static_cast<long long>(s.batch_size)));
  s.update_interval =
      static_cast<std::size_t>(kv.get_int("surprise.update_interval", static_cast<long long>(s.update_interval)));
  s.warmup_steps = static_cast<std::size_t>(kv.get_int("surprise.warmup_steps", static_cast<long long>(s.warmup_steps)));
  s.buffer_capacity =
      static_cast<std::size_t>(kv.get_int("surprise.buffer_capacity", static_cast<long long>(s.buffer_capacity)));
  s.hidden = static_cast<std::size_t>(kv.get_int("surprise.hidden", static_cast<long long>(s.hidden)));
  s.learning_rate = kv.get_double("surprise.learning_rate", s.learning_rate);

  rc.total_steps = static_cast<std::size_t>(kv.get_int("run.total_steps", static_cast<long long>(rc.total_steps)));
  rc.eval_interval = static_cast<std::size_t>(kv.get_int("run.eval_interval", static_cast<long long>(rc.eval_interval)));
  rc.seeds = parse_seeds(kv.get_string("run.seeds", "0"));
  rc.out_dir = kv.get_string("run.out_dir", rc.out_dir);
  rc.log_steps = kv.get_bool("run.log_steps", rc.log_steps);
  rc.checkpoint = kv.get_bool("run.checkpoint", rc.checkpoint);
  kv.finish();

  if (e.variant == Variant::Gridworld) throw ConfigError("env.variant: gridworld runs through the regret command");
  if (alpha_scale.size() != e.resource_dim())
    throw ConfigError("raeb.alpha_scale needs " + std::to_string(e.resource_dim()) + " entries for this variant");
  rc.raeb = raeb::RaebConfig::from_scales(beta, alpha_scale, e.initial_resources(), mode, c);
  rc.validate();
  return rc;
}

/// Canonical text form of a run configuration (written next to the outputs).
inline std::string describe(const RunConfig& rc) {
  std::ostringstream o;
  o.precision(17);
  o << "env.variant = " << to_string(rc.env.variant) << '\n'
    << "env.initial_electricity = " << rc.env.initial_electricity << '\n'
    << "env.initial_goods = " << rc.env.initial_goods << '\n'
    << "env.max_steps = " << rc.env.max_steps << '\n'
    << "env.electricity_cost_scale = " << rc.env.electricity_cost_scale << '\n'
    << "env.goal_reward_base = " << rc.env.goal_reward_base << '\n'
    << "env.physics.power = " << rc.env.physics.power << '\n'
    << "env.physics.gravity = " << rc.env.physics.gravity << '\n'
    << "env.physics.min_position = " << rc.env.physics.min_position << '\n'
    << "env.physics.max_position = " << rc.env.physics.max_position << '\n'
    << "env.physics.max_speed = " << rc.env.physics.max_speed << '\n'
    << "env.physics.goal_position = " << rc.env.physics.goal_position << '\n'
    << "env.physics.start_low = " << rc.env.physics.start_low << '\n'
    << "env.physics.start_high = " << rc.env.physics.start_high << '\n'
    << "agent.learning_rate = " << rc.agent.learning_rate << '\n'
    << "agent.gamma = " << rc.agent.gamma << '\n'
    << "agent.epsilon_start = " << rc.agent.epsilon_start << '\n'
    << "agent.epsilon_end = " << rc.agent.epsilon_end << '\n'
    << "agent.epsilon_fraction = " << rc.agent.epsilon_fraction << '\n'
    << "agent.initial_q = " << rc.agent.initial_q << '\n'
    << "agent.eval_episodes = " << rc.agent.eval_episodes << '\n'
    << "agent.bins.position = " << rc.agent.bins.position_bins << '\n'
    << "agent.bins.velocity = " << rc.agent.bins.velocity_bins << '\n'
    << "agent.bins.resource = " << rc.agent.bins.resource_bins << '\n'
    << "raeb.beta = " << rc.raeb.beta << '\n'
    << "raeb.alpha_scale = ";
  for (std::size_t i = 0; i < rc.raeb.alpha.size(); ++i)
    o << (i ? ", " : "") << rc.raeb.alpha[i] / rc.raeb.i_max[i];
  o << '\n'
    << "raeb.mode = " << raeb::to_string(rc.raeb.mode) << '\n'
    << "raeb.c = " << rc.raeb.c << '\n'
    << "surprise.batch_size = " << rc.surprise.batch_size << '\n'
    << "surprise.update_interval = " << rc.surprise.update_interval << '\n'
    << "surprise.warmup_steps = " << rc.surprise.warmup_steps << '\n'
    << "surprise.buffer_capacity = " << rc.surprise.buffer_capacity << '\n'
    << "surprise.hidden = " << rc.surprise.hidden << '\n'
    << "surprise.learning_rate = " << rc.surprise.learning_rate << '\n'
    << "run.total_steps = " << rc.total_steps << '\n'
    << "run.eval_interval = " << rc.eval_interval << '\n'
    << "run.log_steps = " << (rc.log_steps ? "true" : "false") << '\n'
    << "run.checkpoint = " << (rc.checkpoint ? "true" : "false") << '\n';
  return o.str();
}

}  // namespace r3l::harness
