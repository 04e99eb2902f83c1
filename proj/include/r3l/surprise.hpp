#pragma once

// Surprise bonus: negative log-likelihood of the realized transition under a
// learned diagonal-Gaussian dynamics model, trained online from replay.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "r3l/core.hpp"
#include "r3l/nn.hpp"

namespace r3l::surprise {

/// Fixed-capacity FIFO ring buffer.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    require(capacity > 0, "ring buffer capacity must be positive");
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// Storage-order access; after wrap-around the oldest item is at insertion_index().
  const T& operator[](std::size_t i) const { return items_[i]; }
  std::size_t insertion_index() const { return next_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> items_;
};

/// Welford running mean / variance per coordinate.
class RunningStats {
 public:
  explicit RunningStats(std::size_t dim = 0) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    ++count_;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_);
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }

  std::size_t dim() const { return mean_.size(); }
  long count() const { return count_; }
  double mean(std::size_t i) const { return mean_[i]; }
  double stddev(std::size_t i) const {
    if (count_ < 2) return 1.0;
    return std::max(std::sqrt(m2_[i] / static_cast<double>(count_)), kStdFloor);
  }

  /// (x - mean) / std, clipped to +-kClip.
  double normalize(std::size_t i, double x) const {
    return std::clamp((x - mean(i)) / stddev(i), -kClip, kClip);
  }

  static constexpr double kStdFloor = 1e-4;
  static constexpr double kClip = 10.0;

 private:
  long count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct SurpriseConfig {
  std::size_t batch_size = 256;
  std::size_t update_interval = 1;
  std::size_t warmup_steps = 1000;
  std::size_t buffer_capacity = 1000000;
  std::size_t hidden = 32;
  double learning_rate = 3e-4;

  void validate() const {
    if (batch_size == 0) throw ConfigError("surprise.batch_size must be >= 1");
    if (update_interval == 0) throw ConfigError("surprise.update_interval must be >= 1");
    if (buffer_capacity < batch_size) throw ConfigError("surprise.buffer_capacity must be >= batch_size");
    if (hidden == 0) throw ConfigError("surprise.hidden must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("surprise.learning_rate must be > 0");
  }
};

inline constexpr std::size_t kMaxInput = 12;
inline constexpr std::size_t kMaxTarget = 4;

/// Unnormalized model sample: input [s_o, a] and target s'_o - s_o.
struct Sample {
  std::array<double, kMaxInput> input{};
  std::array<double, kMaxTarget> target{};
};

struct BonusValue {
  double raw = 0.0;
  double emitted = 0.0;
};

class SurpriseModel {
 public:
  SurpriseModel(std::size_t obs_dim, std::size_t action_dim, std::size_t resource_dim, SurpriseConfig cfg,
                RandomStream rng)
      : obs_dim_(obs_dim), action_dim_(action_dim), resource_dim_(resource_dim), cfg_(cfg),
        buffer_(cfg.buffer_capacity), input_stats_(obs_dim + action_dim),
        target_stats_(obs_dim) {
    cfg_.validate();
    require(input_dim() <= kMaxInput && obs_dim <= kMaxTarget, "surprise model dimensions too large");
    params_ = nn::init_params(input_dim(), cfg_.hidden, 2 * obs_dim, rng);
    adam_ = nn::AdamState(params_.data.size(), cfg_.learning_rate);
  }

  std::size_t input_dim() const { return obs_dim_ + action_dim_; }
  const nn::MLPParams& params() const { return params_; }
  nn::MLPParams& params() { return params_; }
  const nn::AdamState& adam() const { return adam_; }
  const RingBuffer<Sample>& buffer() const { return buffer_; }
  const SurpriseConfig& config() const { return cfg_; }
  std::size_t transitions_seen() const { return seen_; }
  bool warmed_up() const { return seen_ >= cfg_.warmup_steps; }
  double running_min() const { return running_min_; }
  long skipped_updates() const { return skipped_; }

  Sample make_sample(const R3LState& s, std::span<const double> a, const R3LState& s_next) const {
    require(s.observation.size() == obs_dim_ && s_next.observation.size() == obs_dim_, "observation dim mismatch");
    require(a.size() == action_dim_ && s.resources.size() == resource_dim_, "action/resource dim mismatch");
    Sample out;
    std::size_t k = 0;
    for (double x : s.observation) out.input[k++] = x;
    for (double x : a) out.input[k++] = x;
    for (std::size_t i = 0; i < obs_dim_; ++i) out.target[i] = s_next.observation[i] - s.observation[i];
    return out;
  }

  /// Raw NLL of the realized transition under the current model (pure).
  double raw_bonus(const R3LState& s, std::span<const double> a, const R3LState& s_next) const {
    const Sample smp = make_sample(s, a, s_next);
    std::array<double, kMaxInput> x{};
    std::array<double, kMaxTarget> y{};
    normalize(smp, x, y);
    const auto pred = nn::forward(params_, std::span<const double>(x.data(), input_dim()));
    return nn::gaussian_nll(pred.mean, pred.log_std, std::span<const double>(y.data(), obs_dim_));
  }

  /// Emitted value for a raw NLL given the current running minimum (pure).
  double emitted(double raw) const {
    if (!warmed_up()) return 0.0;
    return std::max(0.0, raw - running_min_);
  }

  /// Scores a transition for the reward: raw NLL, and the emitted bonus
  /// after the running-minimum shift. Zero during warmup.
  BonusValue score(const R3LState& s, std::span<const double> a, const R3LState& s_next) {
    BonusValue out;
    out.raw = raw_bonus(s, a, s_next);
    if (warmed_up()) {
      running_min_ = std::min(running_min_, out.raw);
      out.emitted = emitted(out.raw);
    }
    return out;
  }

  void add(const R3LState& s, std::span<const double> a, const R3LState& s_next) {
    const Sample smp = make_sample(s, a, s_next);
    input_stats_.add(std::span<const double>(smp.input.data(), input_dim()));
    target_stats_.add(std::span<const double>(smp.target.data(), obs_dim_));
    buffer_.push(smp);
    ++seen_;
  }

  /// Normalized batch for the given buffer indices.
  nn::Batch make_batch(std::span<const std::size_t> indices) const {
    nn::Batch batch;
    batch.n = indices.size();
    batch.inputs.resize(batch.n * input_dim());
    batch.targets.resize(batch.n * obs_dim_);
    std::array<double, kMaxInput> x{};
    std::array<double, kMaxTarget> y{};
    for (std::size_t r = 0; r < indices.size(); ++r) {
      normalize(buffer_[indices[r]], x, y);
      std::copy_n(x.begin(), input_dim(), batch.inputs.begin() + static_cast<std::ptrdiff_t>(r * input_dim()));
      std::copy_n(y.begin(), obs_dim_, batch.targets.begin() + static_cast<std::ptrdiff_t>(r * obs_dim_));
    }
    return batch;
  }

  /// One Adam step on a minibatch drawn uniformly without replacement.
  /// Returns false (and counts a skip) when the buffer is smaller than a batch.
  bool update(RandomStream& rng) {
    if (buffer_.size() < cfg_.batch_size) {
      ++skipped_;
      return false;
    }
    const auto indices = sample_indices(buffer_.size(), cfg_.batch_size, rng);
    const nn::Batch batch = make_batch(indices);
    last_loss_ = nn::backward(params_, batch, grad_);
    nn::adam_step(params_, grad_, adam_);
    return true;
  }

  double last_loss() const { return last_loss_; }

  /// Floyd's algorithm, returned sorted.
  static std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, RandomStream& rng) {
    require(k <= n, "cannot sample more indices than available");
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    if (k == n) {
      for (std::size_t i = 0; i < n; ++i) chosen.push_back(i);
      return chosen;
    }
    for (std::size_t j = n - k; j < n; ++j) {
      const std::size_t t = rng.index(j + 1);
      const bool taken = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
      chosen.push_back(taken ? j : t);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

 private:
  void normalize(const Sample& smp, std::array<double, kMaxInput>& x, std::array<double, kMaxTarget>& y) const {
    for (std::size_t i = 0; i < input_dim(); ++i) x[i] = input_stats_.normalize(i, smp.input[i]);
    for (std::size_t i = 0; i < obs_dim_; ++i) y[i] = target_stats_.normalize(i, smp.target[i]);
  }

  std::size_t obs_dim_, action_dim_, resource_dim_;
  SurpriseConfig cfg_;
  nn::MLPParams params_;
  nn::AdamState adam_;
  RingBuffer<Sample> buffer_;
  RunningStats input_stats_;
  RunningStats target_stats_;
  std::vector<double> grad_;
  std::size_t seen_ = 0;
  double running_min_ = std::numeric_limits<double>::infinity();
  double last_loss_ = 0.0;
  long skipped_ = 0;
};

}  // namespace r3l::surprise
