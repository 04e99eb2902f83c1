#pragma once

// Single-hidden-layer MLP with Swish activation and a diagonal-Gaussian
// head, trained by exact backpropagation and Adam.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "r3l/core.hpp"

namespace r3l::nn {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double swish(double x) { return x * sigmoid(x); }
inline double swish_grad(double x) {
  const double s = sigmoid(x);
  return s + x * s * (1.0 - s);
}

/// Parameters live in one flat buffer: W1 [hidden x in], b1 [hidden],
/// W2 [out x hidden], b2 [out]. The output is [mean (m), log_std (m)].
struct MLPParams {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
  std::vector<double> data;

  MLPParams() = default;
  MLPParams(std::size_t in_, std::size_t hidden_, std::size_t out_)
      : in(in_), hidden(hidden_), out(out_), data(count(in_, hidden_, out_), 0.0) {
    require(out % 2 == 0, "Gaussian head needs an even output width");
  }

  static std::size_t count(std::size_t in, std::size_t hidden, std::size_t out) {
    return hidden * in + hidden + out * hidden + out;
  }

  std::size_t target_dim() const { return out / 2; }

  std::span<double> w1() { return {data.data(), hidden * in}; }
  std::span<double> b1() { return {data.data() + hidden * in, hidden}; }
  std::span<double> w2() { return {data.data() + hidden * in + hidden, out * hidden}; }
  std::span<double> b2() { return {data.data() + hidden * in + hidden + out * hidden, out}; }
  std::span<const double> w1() const { return {data.data(), hidden * in}; }
  std::span<const double> b1() const { return {data.data() + hidden * in, hidden}; }
  std::span<const double> w2() const { return {data.data() + hidden * in + hidden, out * hidden}; }
  std::span<const double> b2() const { return {data.data() + hidden * in + hidden + out * hidden, out}; }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
  }

  bool operator==(const MLPParams&) const = default;
};

/// Glorot-uniform weights, zero biases.
inline MLPParams init_params(std::size_t in, std::size_t hidden, std::size_t out, RandomStream& rng) {
  MLPParams p(in, hidden, out);
  const double l1 = std::sqrt(6.0 / static_cast<double>(in + hidden));
  const double l2 = std::sqrt(6.0 / static_cast<double>(hidden + out));
  for (double& w : p.w1()) w = rng.uniform(-l1, l1);
  for (double& w : p.w2()) w = rng.uniform(-l2, l2);
  return p;
}

struct Prediction {
  std::vector<double> mean;
  std::vector<double> log_std;  // clamped to [kLogStdMin, kLogStdMax]
};

/// Forward pass that also exposes hidden pre-activations and activations.
inline void forward_raw(const MLPParams& p, std::span<const double> x, std::span<double> raw_out,
                        std::span<double> hidden_pre, std::span<double> hidden_act) {
  const auto w1 = p.w1();
  const auto b1 = p.b1();
  const auto w2 = p.w2();
  const auto b2 = p.b2();
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double z = b1[j];
    const double* row = &w1[j * p.in];
    for (std::size_t i = 0; i < p.in; ++i) z += row[i] * x[i];
    hidden_pre[j] = z;
    hidden_act[j] = swish(z);
  }
  for (std::size_t k = 0; k < p.out; ++k) {
    double y = b2[k];
    const double* row = &w2[k * p.hidden];
    for (std::size_t j = 0; j < p.hidden; ++j) y += row[j] * hidden_act[j];
    raw_out[k] = y;
  }
}

inline Prediction forward(const MLPParams& p, std::span<const double> x) {
  require(x.size() == p.in, "forward(): input dimension mismatch");
  std::vector<double> pre(p.hidden), act(p.hidden), raw(p.out);
  forward_raw(p, x, raw, pre, act);
  const std::size_t m = p.target_dim();
  Prediction pred{std::vector<double>(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(m)),
                  std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) pred.log_std[i] = std::clamp(raw[m + i], kLogStdMin, kLogStdMax);
  return pred;
}

/// Forward pass for an input assembled from pieces (state, action, ...).
inline Prediction forward(const MLPParams& p, std::span<const double> s, std::span<const double> a) {
  std::vector<double> x(s.begin(), s.end());
  x.insert(x.end(), a.begin(), a.end());
  return forward(p, x);
}

/// Negative log-likelihood of `target` under N(mean, exp(log_std)^2), summed over dims.
inline double gaussian_nll(std::span<const double> mean, std::span<const double> log_std,
                           std::span<const double> target) {
  require(mean.size() == log_std.size() && mean.size() == target.size(), "gaussian_nll(): dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (target[i] - mean[i]) * std::exp(-log_std[i]);
    total += log_std[i] + kHalfLog2Pi + 0.5 * z * z;
  }
  return total;
}

/// Row-major batch: inputs [n x in], targets [n x m].
struct Batch {
  std::size_t n = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::span<const double> input(std::size_t i, std::size_t in) const { return {inputs.data() + i * in, in}; }
  std::span<const double> target(std::size_t i, std::size_t m) const { return {targets.data() + i * m, m}; }
};

inline double batch_nll(const MLPParams& p, const Batch& batch) {
  require(batch.n > 0, "empty batch");
  const std::size_t m = p.target_dim();
  double total = 0.0;
  for (std::size_t i = 0; i < batch.n; ++i) {
    const auto pred = forward(p, batch.input(i, p.in));
    total += gaussian_nll(pred.mean, pred.log_std, batch.target(i, m));
  }
  return total / static_cast<double>(batch.n);
}

/// Gradient of the mean batch NLL; returns the loss as well. Log-std outputs
/// outside the clamp range receive zero gradient.
inline double backward(const MLPParams& p, const Batch& batch, std::vector<double>& grad) {
  require(batch.n > 0, "backward(): empty batch");
  require(batch.inputs.size() == batch.n * p.in, "backward(): input size mismatch");
  const std::size_t m = p.target_dim();
  require(batch.targets.size() == batch.n * m, "backward(): target size mismatch");
  grad.assign(p.data.size(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = gw1 + p.hidden * p.in;
  double* gw2 = gb1 + p.hidden;
  double* gb2 = gw2 + p.out * p.hidden;
  const auto w2 = p.w2();

  std::vector<double> pre(p.hidden), act(p.hidden), raw(p.out), dout(p.out), dhid(p.hidden);
  const double scale = 1.0 / static_cast<double>(batch.n);
  double loss = 0.0;
  for (std::size_t n = 0; n < batch.n; ++n) {
    const auto x = batch.input(n, p.in);
    const auto t = batch.target(n, m);
    forward_raw(p, x, raw, pre, act);
    for (std::size_t i = 0; i < m; ++i) {
      const double raw_ls = raw[m + i];
      const double ls = std::clamp(raw_ls, kLogStdMin, kLogStdMax);
      const double inv_std = std::exp(-ls);
      const double diff = t[i] - raw[i];
      const double z = diff * inv_std;
      loss += ls + kHalfLog2Pi + 0.5 * z * z;
      dout[i] = -z * inv_std * scale;
      const bool inside = raw_ls > kLogStdMin && raw_ls < kLogStdMax;
      dout[m + i] = inside ? (1.0 - z * z) * scale : 0.0;
    }
    std::fill(dhid.begin(), dhid.end(), 0.0);
    for (std::size_t k = 0; k < p.out; ++k) {
      const double g = dout[k];
      if (g == 0.0) continue;
      gb2[k] += g;
      double* grow = &gw2[k * p.hidden];
      const double* wrow = &w2[k * p.hidden];
      for (std::size_t j = 0; j < p.hidden; ++j) {
        grow[j] += g * act[j];
        dhid[j] += g * wrow[j];
      }
    }
    for (std::size_t j = 0; j < p.hidden; ++j) {
      const double g = dhid[j] * swish_grad(pre[j]);
      gb1[j] += g;
      double* grow = &gw1[j * p.in];
      for (std::size_t i = 0; i < p.in; ++i) grow[i] += g * x[i];
    }
  }
  return loss * scale;
}

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0, double learning_rate = 3e-4)
      : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}
};

/// Adam with bias correction.
inline void adam_step(MLPParams& p, std::span<const double> grad, AdamState& st) {
  require(grad.size() == p.data.size() && st.m.size() == p.data.size() && st.v.size() == p.data.size(),
          "adam_step(): shape mismatch");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const double g = grad[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    const double mhat = st.m[i] / c1;
    const double vhat = st.v[i] / c2;
    p.data[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

// Checkpoint format (text):
//   r3l-mlp 1
//   <in> <hidden> <out>
//   <W1 row-major> <b1> <W2 row-major> <b2>   one value per line, %.17g

inline void save_params(const MLPParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "r3l-mlp 1\n" << p.in << ' ' << p.hidden << ' ' << p.out << '\n';
  char buf[40];
  for (double x : p.data) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out << buf;
  }
}

inline MLPParams load_params(const std::string& path) {
  std::ifstream in(path);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "r3l-mlp" || version != 1)
    throw ConfigError("not an r3l-mlp checkpoint: " + path);
  std::size_t i = 0, h = 0, o = 0;
  if (!(in >> i >> h >> o)) throw ConfigError("truncated checkpoint header: " + path);
  MLPParams p(i, h, o);
  for (double& x : p.data) {
    if (!(in >> x)) throw ConfigError("truncated checkpoint body: " + path);
  }
  return p;
}

}  // namespace r3l::nn
