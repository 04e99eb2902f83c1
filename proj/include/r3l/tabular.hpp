#pragma once

// Optimistic Q-learning with a weighted UCB-Hoeffding bonus on finite
// episodic MDPs, the exact backward-induction oracle, and regret tracking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include "r3l/core.hpp"
#include "r3l/envs.hpp"

namespace r3l::tabular {

/// alpha_t = (H + 1) / (H + t).
inline double learning_rate(long t, long H) {
  require(t >= 1, "learning_rate needs t >= 1");
  return static_cast<double>(H + 1) / static_cast<double>(H + t);
}

/// b_t = c * sqrt(H^3 * iota / t).
inline double ucb_bonus(long t, long H, double iota, double c) {
  require(t >= 1 && iota > 0.0 && c > 0.0, "ucb_bonus needs t >= 1, iota > 0, c > 0");
  const double h = static_cast<double>(H);
  return c * std::sqrt(h * h * h * iota / static_cast<double>(t));
}

/// iota = log(S * A * T / p) with T = K * H.
inline double log_factor(std::size_t S, std::size_t A, std::size_t H, std::size_t K, double p) {
  require(p > 0.0 && p < 1.0, "failure probability must lie in (0, 1)");
  const double T = static_cast<double>(std::max<std::size_t>(K, 1) * H);
  return std::log(static_cast<double>(S * A) * T / p);
}

/// How the bonus weight beta(s, a) in [1, d] is chosen at each step.
struct BonusWeight {
  enum class Kind { Constant, ResourceAware };
  Kind kind = Kind::Constant;
  double d = 1.0;
  /// Resource-aware weights: beta = clamp(1 + (d - 1) g(I), 1, d) with
  /// g(I) = (I + alpha) / (I_max + alpha).
  double alpha = 1.0;
  double i_max = 1.0;

  static BonusWeight constant(double d) { return {Kind::Constant, d, 1.0, 1.0}; }
  static BonusWeight resource_aware(double d, double alpha, double i_max) {
    return {Kind::ResourceAware, d, alpha, i_max};
  }

  double operator()(double resource) const {
    if (kind == Kind::Constant) return d;
    const double g = (resource + alpha) / (i_max + alpha);
    return std::clamp(1.0 + (d - 1.0) * g, 1.0, d);
  }
};

struct LearnerConfig {
  double c = 2.0;
  double p = 0.05;
  BonusWeight weight = BonusWeight::constant(1.0);
};

class TabularLearner {
 public:
  TabularLearner(std::size_t S, std::size_t A, std::size_t H, double c, double iota, double d_max = 1.0)
      : S_(S), A_(A), H_(H), c_(c), iota_(iota), d_max_(d_max),
        q_(H * S * A, static_cast<double>(H)),
        v_((H + 1) * S, static_cast<double>(H)),
        n_(H * S * A, 0) {
    require(S > 0 && A > 0 && H > 0, "learner needs S, A, H >= 1");
    require(c > 0.0 && iota > 0.0, "learner needs c > 0 and iota > 0");
    require(d_max >= 1.0, "weight bound d must be >= 1");
    std::fill(v_.begin() + static_cast<std::ptrdiff_t>(H * S), v_.end(), 0.0);
  }

  std::size_t S() const { return S_; }
  std::size_t A() const { return A_; }
  std::size_t H() const { return H_; }
  double iota() const { return iota_; }

  double q(std::size_t h, std::size_t s, std::size_t a) const { return q_[idx(h, s, a)]; }
  /// V is indexed 0..H; V(H, .) == 0 is the terminal value.
  double v(std::size_t h, std::size_t s) const { return v_[h * S_ + s]; }
  long visits(std::size_t h, std::size_t s, std::size_t a) const { return n_[idx(h, s, a)]; }
  const std::vector<double>& q_table() const { return q_; }

  /// Greedy action, lowest index on ties.
  std::size_t greedy(std::size_t h, std::size_t s) const {
    require(h < H_ && s < S_, "greedy() index out of range");
    const double* row = &q_[idx(h, s, 0)];
    return static_cast<std::size_t>(std::max_element(row, row + A_) - row);
  }

  void update(std::size_t h, std::size_t s, std::size_t a, double r, std::size_t s_next, double weight = 1.0) {
    require(h < H_ && s < S_ && a < A_ && s_next < S_, "update() index out of range");
    require(weight >= 1.0 && weight <= d_max_, "bonus weight outside [1, d]");
    const std::size_t i = idx(h, s, a);
    const long t = ++n_[i];
    const double lr = learning_rate(t, static_cast<long>(H_));
    const double target = r + v(h + 1, s_next) + weight * ucb_bonus(t, static_cast<long>(H_), iota_, c_);
    q_[i] = (1.0 - lr) * q_[i] + lr * target;
    const double* row = &q_[idx(h, s, 0)];
    v_[h * S_ + s] = std::min(static_cast<double>(H_), *std::max_element(row, row + A_));
  }

 private:
  std::size_t idx(std::size_t h, std::size_t s, std::size_t a) const { return (h * S_ + s) * A_ + a; }

  std::size_t S_, A_, H_;
  double c_, iota_, d_max_;
  std::vector<double> q_;
  std::vector<double> v_;
  std::vector<long> n_;
};

struct OptimalValues {
  std::size_t S = 0, A = 0, H = 0;
  std::vector<double> q;  // [H][S][A]
  std::vector<double> v;  // [H+1][S], v[H][.] == 0

  double q_at(std::size_t h, std::size_t s, std::size_t a) const { return q[(h * S + s) * A + a]; }
  double v_at(std::size_t h, std::size_t s) const { return v[h * S + s]; }
};

/// Backward induction over the reward and kernel tables.
inline OptimalValues value_iteration(const GridworldSpec& spec) {
  spec.validate();
  OptimalValues out{spec.S, spec.A, spec.H, std::vector<double>(spec.H * spec.S * spec.A, 0.0),
                    std::vector<double>((spec.H + 1) * spec.S, 0.0)};
  for (std::size_t h = spec.H; h-- > 0;) {
    for (std::size_t s = 0; s < spec.S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < spec.A; ++a) {
        const auto next = spec.next_distribution(h, s, a);
        double expect = 0.0;
        for (std::size_t s2 = 0; s2 < spec.S; ++s2) expect += next[s2] * out.v[(h + 1) * spec.S + s2];
        const double qv = spec.r(h, s, a) + expect;
        out.q[spec.hsa(h, s, a)] = qv;
        best = std::max(best, qv);
      }
      out.v[h * spec.S + s] = best;
    }
  }
  return out;
}

struct RegretRecord {
  std::size_t episode = 0;
  double v_star = 0.0;
  double realized_return = 0.0;
  double regret = 0.0;
  double cumulative_regret = 0.0;
};

/// Called after every episode with the learner state; used by optimism checks.
using EpisodeObserver = std::function<void(std::size_t episode, const TabularLearner&)>;

inline std::vector<RegretRecord> run_regret_experiment(const GridworldSpec& spec, const LearnerConfig& cfg,
                                                       std::size_t K, std::uint64_t seed,
                                                       const EpisodeObserver& observer = {}) {
  std::vector<RegretRecord> records;
  if (K == 0) return records;
  const auto optimal = value_iteration(spec);
  const double iota = log_factor(spec.S, spec.A, spec.H, K, cfg.p);
  TabularLearner learner(spec.S, spec.A, spec.H, cfg.c, iota, cfg.weight.d);
  RandomStream rng = seeded_rng(seed).split("gridworld");
  records.reserve(K);
  double cumulative = 0.0;
  const double v_star = optimal.v_at(0, spec.initial_state);
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t s = spec.initial_state;
    double resource = spec.initial_resource;
    double ret = 0.0;
    for (std::size_t h = 0; h < spec.H; ++h) {
      const std::size_t a = learner.greedy(h, s);
      const double weight = cfg.weight(resource);
      const auto out = gridworld_step(spec, h, s, a, resource, rng);
      learner.update(h, s, a, out.reward, out.next_state, weight);
      ret += out.reward;
      resource = out.resource_after;
      s = out.next_state;
    }
    cumulative += v_star - ret;
    records.push_back({k + 1, v_star, ret, v_star - ret, cumulative});
    if (observer) observer(k + 1, learner);
  }
  return records;
}

/// Least-squares slope of log(cumulative regret) against log(episode) over
/// log-spaced episodes in [k_lo, k_hi].
inline double regret_growth_exponent(const std::vector<RegretRecord>& records, std::size_t k_lo,
                                     std::size_t k_hi, std::size_t points = 50) {
  require(k_lo >= 1 && k_lo < k_hi && k_hi <= records.size(), "bad regret fit window");
  std::vector<double> xs, ys;
  const double l0 = std::log(static_cast<double>(k_lo));
  const double l1 = std::log(static_cast<double>(k_hi));
  for (std::size_t i = 0; i < points; ++i) {
    const double lk = l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(points - 1);
    const auto k = static_cast<std::size_t>(std::llround(std::exp(lk)));
    const double cum = records[std::clamp<std::size_t>(k, 1, records.size()) - 1].cumulative_regret;
    if (cum <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(k)));
    ys.push_back(std::log(cum));
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

inline void write_regret_csv(std::ostream& out, const std::vector<RegretRecord>& records) {
  out << "# schema=1\n";
  out << "episode,v_star,return,regret,cum_regret\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.episode, r.v_star, r.realized_return,
                  r.regret, r.cumulative_regret);
    out << buf;
  }
}

}  // namespace r3l::tabular
