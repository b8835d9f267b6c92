#pragma once

#include <cmath>
#include <optional>

#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/rng.hpp"
#include "fovea/scene.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

/// Simulated stand-in for the vision-language model: a noisy resolvability
/// probe plus an answerer that may hallucinate.
struct ObserverConfig {
  double false_positive = 0.0;  // P(r=1 | not visible)
  double false_negative = 0.0;  // P(r=0 | visible)
  double hallucination = 0.0;   // P(wrong class | visible)
  int probe_samples = 3;        // K

  friend bool operator==(const ObserverConfig&, const ObserverConfig&) = default;

  void validate() const {
    if (!(false_positive >= 0.0 && false_positive < 1.0)) {
      throw ParameterError("false_positive", "must be in [0, 1)");
    }
    if (!(false_negative >= 0.0 && false_negative < 1.0)) {
      throw ParameterError("false_negative", "must be in [0, 1)");
    }
    if (!(hallucination >= 0.0 && hallucination < 1.0)) {
      throw ParameterError("hallucination", "must be in [0, 1)");
    }
    if (probe_samples < 1) throw ParameterError("probe_samples", "must be >= 1");
  }
};

/// One binary resolvability probe on a fresh visibility draw.
inline int probe_once(const Scene& scene, const Design& d, const ObserverConfig& cfg,
                      const SensorConfig& sensor, Rng& rng) {
  const bool visible = rng.bernoulli(visibility_probability(scene, d, sensor));
  return rng.bernoulli(visible ? 1.0 - cfg.false_negative : cfg.false_positive) ? 1 : 0;
}

/// E[r] for the probe, in closed form.
inline double expected_probe(const Scene& scene, const Design& d, const ObserverConfig& cfg,
                             const SensorConfig& sensor) {
  const double p = visibility_probability(scene, d, sensor);
  return (1.0 - cfg.false_negative) * p + cfg.false_positive * (1.0 - p);
}

/// Mean of K independent probes; lies on the lattice {0, 1/K, ..., 1}.
inline double estimate_utility(const Scene& scene, const Design& d, const ObserverConfig& cfg,
                               const SensorConfig& sensor, Rng& rng) {
  if (cfg.probe_samples < 1) throw ParameterError("probe_samples", "must be >= 1");
  int hits = 0;
  for (int k = 0; k < cfg.probe_samples; ++k) hits += probe_once(scene, d, cfg, sensor, rng);
  return static_cast<double>(hits) / cfg.probe_samples;
}

/// Answer attempt on crop d. std::nullopt means abstain; a class is only ever
/// returned when the visibility draw succeeded.
inline std::optional<int> answer(const Scene& scene, const Design& d, const ObserverConfig& cfg,
                                 const SensorConfig& sensor, Rng& rng) {
  if (!rng.bernoulli(visibility_probability(scene, d, sensor))) return std::nullopt;
  const int ny = scene.params.y_cardinality;
  if (!rng.bernoulli(cfg.hallucination)) return scene.target_class;
  int wrong = static_cast<int>(rng.index(static_cast<std::size_t>(ny - 1)));
  if (wrong >= scene.target_class) ++wrong;
  return wrong;
}

}  // namespace fovea
