#pragma once

// Resource-aware exploration bonus: the coefficient g(I(s)), reward shaping
// r + beta * g * b, and the ablation variants built from the same pieces.

#include <functional>
#include <string>
#include <vector>

#include "r3l/core.hpp"

namespace r3l::raeb {

enum class Mode {
  Full,             // r + beta * g * b
  SurpriseOnly,     // r + beta * b
  CoefficientOnly,  // r + beta * g
  SurpriseRB,       // r + beta * b + c * g
  SacRB,            // r + c * g
  None,             // r
};

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "full";
    case Mode::SurpriseOnly: return "surprise_only";
    case Mode::CoefficientOnly: return "coefficient_only";
    case Mode::SurpriseRB: return "surprise_rb";
    case Mode::SacRB: return "sac_rb";
    case Mode::None: return "none";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "full") return Mode::Full;
  if (s == "surprise_only") return Mode::SurpriseOnly;
  if (s == "coefficient_only") return Mode::CoefficientOnly;
  if (s == "surprise_rb") return Mode::SurpriseRB;
  if (s == "sac_rb") return Mode::SacRB;
  if (s == "none") return Mode::None;
  throw ConfigError("unknown raeb.mode '" + s + "'");
}

/// True for modes whose reward uses the surprise bonus b.
inline bool uses_bonus(Mode m) {
  return m == Mode::Full || m == Mode::SurpriseOnly || m == Mode::SurpriseRB;
}

struct RaebConfig {
  double beta = 0.25;
  std::vector<double> alpha;  // absolute, one per resource
  std::vector<double> i_max;  // initial resources, one per resource
  Mode mode = Mode::Full;
  double c = 1.0;  // additive resource bonus scale for the RB variants

  /// alpha_i = scale_i * i_max_i.
  static RaebConfig from_scales(double beta, const std::vector<double>& alpha_scale,
                                const std::vector<double>& i_max, Mode mode, double c = 1.0) {
    if (alpha_scale.size() != i_max.size())
      throw ConfigError("raeb.alpha_scale must have one entry per resource");
    RaebConfig cfg{beta, {}, i_max, mode, c};
    for (std::size_t i = 0; i < i_max.size(); ++i) cfg.alpha.push_back(alpha_scale[i] * i_max[i]);
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (!(beta > 0.0)) throw ConfigError("raeb.beta must be > 0");
    if (alpha.empty() || alpha.size() != i_max.size())
      throw ConfigError("raeb alpha and i_max must be nonempty and of equal length");
    for (double a : alpha)
      if (!(a > 0.0)) throw ConfigError("raeb alpha entries must be > 0");
    for (double m : i_max)
      if (!(m > 0.0)) throw ConfigError("raeb i_max entries must be > 0");
  }
};

/// prod_i (I_i + alpha_i) / (I_max,i + alpha_i); the single-resource case is
/// the one-factor product.
inline double coefficient(std::span<const double> resources, const RaebConfig& cfg) {
  require(resources.size() == cfg.alpha.size() && resources.size() == cfg.i_max.size(),
          "coefficient(): resource dimension mismatch");
  double g = 1.0;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    require(resources[i] >= 0.0, "coefficient(): negative resource");
    g *= (resources[i] + cfg.alpha[i]) / (cfg.i_max[i] + cfg.alpha[i]);
  }
  return g;
}

inline double coefficient(const ResourceVector& resources, const RaebConfig& cfg) {
  return coefficient(resources.values(), cfg);
}

struct ShapedReward {
  double extrinsic = 0.0;
  double coefficient = 1.0;
  double bonus = 0.0;
  double total = 0.0;

  double intrinsic() const { return total - extrinsic; }
};

/// Shaped learning reward. `resources` are those of the state the action was
/// taken from.
inline ShapedReward shape(double extrinsic, const ResourceVector& resources, double bonus, const RaebConfig& cfg) {
  require(bonus >= 0.0, "shape(): bonus must be >= 0");
  const double g = coefficient(resources, cfg);
  ShapedReward out{extrinsic, g, bonus, extrinsic};
  switch (cfg.mode) {
    case Mode::Full:
      out.total = extrinsic + cfg.beta * g * bonus;
      break;
    case Mode::SurpriseOnly:
      out.coefficient = 1.0;
      out.total = extrinsic + cfg.beta * bonus;
      break;
    case Mode::CoefficientOnly:
      out.bonus = 1.0;
      out.total = extrinsic + cfg.beta * g;
      break;
    case Mode::SurpriseRB:
      out.total = extrinsic + cfg.beta * bonus + cfg.c * g;
      break;
    case Mode::SacRB:
      out.total = extrinsic + cfg.c * g;
      break;
    case Mode::None:
      break;
    default:
      throw ConfigError("shape(): unknown mode");
  }
  return out;
}

using CoefficientFn = std::function<double(std::span<const double>)>;

/// Property driver: draws random resource vectors in [0, I_max] and a second
/// vector that differs in one coordinate, and checks g respects the order.
inline bool coefficient_is_monotone(const RaebConfig& cfg, const CoefficientFn& g, RandomStream& rng,
                                    std::size_t samples = 10000) {
  const std::size_t d = cfg.i_max.size();
  std::vector<double> lo(d), hi(d);
  for (std::size_t n = 0; n < samples; ++n) {
    for (std::size_t i = 0; i < d; ++i) lo[i] = rng.uniform(0.0, cfg.i_max[i]);
    hi = lo;
    const std::size_t k = rng.index(d);
    hi[k] = rng.uniform(lo[k], cfg.i_max[k]);
    if (g(lo) > g(hi)) return false;
  }
  return true;
}

inline bool coefficient_is_monotone(const RaebConfig& cfg, RandomStream& rng, std::size_t samples = 10000) {
  return coefficient_is_monotone(
      cfg, [&cfg](std::span<const double> r) { return coefficient(r, cfg); }, rng, samples);
}

}  // namespace r3l::raeb
