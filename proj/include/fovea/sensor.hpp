#pragma once

#include <cmath>

#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/rng.hpp"
#include "fovea/scene.hpp"

namespace fovea {

/// Bandwidth-limited sensor. Densities are dimensionless token counts per unit
/// area; the reference density is 1.
struct SensorConfig {
  double bandwidth = 1024.0;        // token budget shared across the crop
  double nyquist_threshold = 1.0;   // critical density, scaled per scene by rho_req
  double slope = 4.0;               // logistic steepness in log-density
  double confusion = 0.0;           // P(wrong class symbol | resolved)

  friend bool operator==(const SensorConfig&, const SensorConfig&) = default;

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw ParameterError("bandwidth", "must be finite and > 0");
    }
    if (!(nyquist_threshold > 0.0)) throw ParameterError("nyquist_threshold", "must be > 0");
    if (!(slope > 0.0)) throw ParameterError("slope", "must be > 0");
    if (!(confusion >= 0.0 && confusion < 1.0)) throw ParameterError("confusion", "must be in [0, 1)");
  }
};

/// Observation alphabet: class symbols 0..|Y|-1 plus the noise symbol |Y|.
inline constexpr int noise_symbol(int y_cardinality) noexcept { return y_cardinality; }

/// What planners and belief updates see.
struct Observation {
  int symbol = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Full draw from the sensor. `visible` is the sampled gate, kept for
/// diagnostics; only `observation` may flow into planning.
struct SensorReading {
  Observation observation;
  bool visible = false;
  bool degenerate_area = false;
};

inline constexpr double kDegenerateArea = 1e-12;

inline double density(const Design& d, const SensorConfig& cfg) noexcept {
  return cfg.bandwidth / d.area();
}

struct Resolution {
  double phi = 0.0;
  bool degenerate = false;  // area below kDegenerateArea, reported as the phi -> 1 limit
};

/// phi(d) = logistic(k * (ln rho(d) - ln(tau * rho_req))), written in the
/// overflow-free form 1 / (1 + (tau * rho_req / rho)^k).
inline Resolution resolve(const Design& d, const SensorConfig& cfg, double rho_req) {
  if (!(rho_req > 0.0)) throw ParameterError("rho_req", "must be > 0");
  const double a = d.area();
  if (a < kDegenerateArea) return Resolution{1.0, true};
  const double log_ratio = std::log(cfg.nyquist_threshold * rho_req) - std::log(density(d, cfg));
  const double x = cfg.slope * log_ratio;
  double phi;
  if (x > 0.0) {
    const double e = std::exp(-x);
    phi = e / (1.0 + e);
  } else {
    phi = 1.0 / (1.0 + std::exp(x));
  }
  return Resolution{phi, false};
}

inline double resolution_probability(const Design& d, const SensorConfig& cfg, double rho_req) {
  return resolve(d, cfg, rho_req).phi;
}

/// Area at which phi crosses 0.5.
inline double critical_area(const SensorConfig& cfg, double rho_req) noexcept {
  return cfg.bandwidth / (cfg.nyquist_threshold * rho_req);
}

/// p(z | y, resolved).
inline double signal_pmf(int z, int y, int y_cardinality, double confusion) noexcept {
  if (z < 0 || z >= y_cardinality) return 0.0;
  if (z == y) return 1.0 - confusion;
  return confusion / static_cast<double>(y_cardinality - 1);
}

/// p0(z): the background emits the noise symbol deterministically.
inline double noise_pmf(int z, int y_cardinality) noexcept {
  return z == noise_symbol(y_cardinality) ? 1.0 : 0.0;
}

/// Mixture likelihood with phi supplied directly.
inline double mixture_likelihood(int z, int y_hyp, bool inside, double phi, int y_cardinality,
                                 double confusion) noexcept {
  const double p0 = noise_pmf(z, y_cardinality);
  if (!inside) return p0;
  return phi * signal_pmf(z, y_hyp, y_cardinality, confusion) + (1.0 - phi) * p0;
}

inline double observation_likelihood(Observation z, int y_hyp, bool inside, const Design& d,
                                     const SensorConfig& cfg, double rho_req, int y_cardinality) {
  const double phi = inside ? resolution_probability(d, cfg, rho_req) : 0.0;
  return mixture_likelihood(z.symbol, y_hyp, inside, phi, y_cardinality, cfg.confusion);
}

/// P(S = 1 | target, d) for the scene's true target.
inline double visibility_probability(const Scene& scene, const Design& d, const SensorConfig& cfg) {
  if (!d.contains(scene.target_location)) return 0.0;
  return resolution_probability(d, cfg, scene.rho_req());
}

inline SensorReading sample_observation(const Scene& scene, const Design& d,
                                        const SensorConfig& cfg, Rng& rng) {
  const int ny = scene.params.y_cardinality;
  SensorReading reading;
  const Resolution res = resolve(d, cfg, scene.rho_req());
  reading.degenerate_area = res.degenerate;
  const double p_visible = d.contains(scene.target_location) ? res.phi : 0.0;
  reading.visible = rng.bernoulli(p_visible);
  if (!reading.visible) {
    reading.observation.symbol = noise_symbol(ny);
    return reading;
  }
  if (rng.bernoulli(cfg.confusion)) {
    // Uniform over the |Y|-1 wrong classes.
    int wrong = static_cast<int>(rng.index(static_cast<std::size_t>(ny - 1)));
    if (wrong >= scene.target_class) ++wrong;
    reading.observation.symbol = wrong;
  } else {
    reading.observation.symbol = scene.target_class;
  }
  return reading;
}

}  // namespace fovea
