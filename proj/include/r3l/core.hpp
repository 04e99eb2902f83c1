#pragma once

// Resource-restricted MDP vocabulary: augmented states, resource accounting,
// episode bookkeeping and the random stream used by every stochastic component.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace r3l {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

/// Nonnegative d-dimensional quantity of each resource type.
class ResourceVector {
 public:
  ResourceVector() = default;
  ResourceVector(std::initializer_list<double> v) : ResourceVector(std::vector<double>(v)) {}
  explicit ResourceVector(std::vector<double> v) : values_(std::move(v)) {
    for (double x : values_) {
      require(std::isfinite(x) && x >= 0.0, "resource components must be finite and >= 0");
    }
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  bool operator==(const ResourceVector&) const = default;

 private:
  std::vector<double> values_;
};

/// The augmented state [s_o, s_r].
struct R3LState {
  std::vector<double> observation;
  ResourceVector resources;

  /// Serialized form: observation followed by resources.
  std::vector<double> flatten() const {
    std::vector<double> out(observation);
    out.insert(out.end(), resources.vec().begin(), resources.vec().end());
    return out;
  }

  /// Inverse of flatten(); `obs_dim` is the split point.
  static R3LState split(std::span<const double> flat, std::size_t obs_dim) {
    require(obs_dim <= flat.size(), "split point beyond state length");
    return R3LState{std::vector<double>(flat.begin(), flat.begin() + obs_dim),
                    ResourceVector(std::vector<double>(flat.begin() + obs_dim, flat.end()))};
  }

  bool operator==(const R3LState&) const = default;
};

/// The resource-aware map I(s): projection onto the resource slots.
inline const ResourceVector& resource_of(const R3LState& state) { return state.resources; }

struct Transition {
  R3LState state;
  std::vector<double> action;
  double reward = 0.0;
  R3LState next_state;
  bool terminal = false;
  bool truncated = false;
};

struct EpisodeLog {
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;
  std::vector<double> bonuses;
  std::vector<double> coefficients;

  void push(Transition t, double bonus, double coefficient) {
    transitions.push_back(std::move(t));
    bonuses.push_back(bonus);
    coefficients.push_back(coefficient);
  }

  bool consistent() const {
    return bonuses.size() == transitions.size() && coefficients.size() == transitions.size();
  }
};

/// True iff resource `index` never increases across the episode, including
/// between the pre- and post-state of each transition.
inline bool check_non_replenishable(const EpisodeLog& log, std::size_t index) {
  if (log.transitions.empty()) return true;
  const std::size_t d = log.transitions.front().state.resources.size();
  require(index < d, "resource index out of range");
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& t : log.transitions) {
    const double before = t.state.resources[index];
    const double after = t.next_state.resources[index];
    if (before > prev || after > before) return false;
    prev = after;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based generator: draw i is a pure function of (key, i).
/// Sub-streams are derived by name, so the draws a component sees do not
/// depend on how many draws other components made.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 0) : key_(detail::mix64(seed ^ 0x5DEECE66DULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return detail::mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  /// Independent stream identified by `name`; does not advance this stream.
  RandomStream split(std::string_view name) const {
    RandomStream child;
    child.key_ = detail::mix64(key_ ^ detail::mix64(detail::fnv1a(name)));
    child.counter_ = 0;
    return child;
  }

  RandomStream split(std::uint64_t index) const {
    RandomStream child;
    child.key_ = detail::mix64(key_ ^ detail::mix64(index + 0xA0761D6478BD642FULL));
    child.counter_ = 0;
    return child;
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    require(n > 0, "index() needs a nonempty range");
    // Lemire's multiply-shift with rejection.
    const std::uint64_t range = n;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (one draw per pair, no caching).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Sample an index from a discrete distribution.
  std::size_t categorical(std::span<const double> probs) {
    double u = uniform();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (u < probs[i]) return i;
      u -= probs[i];
    }
    return probs.size() - 1;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

inline RandomStream seeded_rng(std::uint64_t seed) { return RandomStream(seed); }

}  // namespace r3l
