#include <gtest/gtest.h>

#include "fovea/metrics.hpp"
#include "fovea/observer.hpp"

using namespace fovea;

namespace {

Scene point_scene(Point target, double rho_req, int ny = 4, int target_class = 1) {
  Scene s;
  s.params.grid_size = 4;
  s.params.y_cardinality = ny;
  s.params.target_feature_scale = rho_req;
  s.target_location = target;
  s.target_class = target_class;
  s.suggested_prior.assign(16, 1.0 / 16.0);
  return s;
}

double rho_for_phi(double area, double p, const SensorConfig& cfg = {}) {
  return cfg.bandwidth / (cfg.nyquist_threshold * area) * std::pow(1.0 / p - 1.0, 1.0 / cfg.slope);
}

constexpr double kRhoPhiOne = 1e-9;
const Design kQuarter{0, 0, 0.5, 0.5};

}  // namespace

TEST(Probe, OutsideWithoutFalsePositivesIsZero) {
  const Scene s = point_scene({0.8, 0.8}, kRhoPhiOne);
  Rng rng(1);
  ObserverConfig cfg;
  cfg.false_negative = 0.3;
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(probe_once(s, kQuarter, cfg, {}, rng), 0);
}

TEST(Probe, VisibleWithoutFalseNegativesIsOne) {
  const Scene s = point_scene({0.2, 0.2}, kRhoPhiOne);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(probe_once(s, kQuarter, ObserverConfig{}, {}, rng), 1);
}

TEST(Probe, NoisyRateMatchesClosedForm) {
  const Scene s = point_scene({0.2, 0.2}, rho_for_phi(0.25, 0.6));
  ObserverConfig cfg;
  cfg.false_positive = 0.05;
  cfg.false_negative = 0.1;
  EXPECT_NEAR(expected_probe(s, kQuarter, cfg, {}), 0.9 * 0.6 + 0.05 * 0.4, 1e-12);
  Rng rng(3);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += probe_once(s, kQuarter, cfg, {}, rng);
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.56, 0.01);
}

TEST(EstimateUtility, LatticeAndLimits) {
  Rng rng(4);
  EXPECT_DOUBLE_EQ(estimate_utility(point_scene({0.2, 0.2}, kRhoPhiOne), kQuarter, ObserverConfig{}, {}, rng), 1.0);
  ObserverConfig big;
  big.probe_samples = 7;
  EXPECT_DOUBLE_EQ(estimate_utility(point_scene({0.8, 0.8}, kRhoPhiOne), kQuarter, big, {}, rng), 0.0);
  const Scene half = point_scene({0.2, 0.2}, rho_for_phi(0.25, 0.5));
  for (int i = 0; i < 100; ++i) {
    const double j = estimate_utility(half, kQuarter, ObserverConfig{}, {}, rng);
    EXPECT_DOUBLE_EQ(j * 3.0, std::round(j * 3.0));
  }
}

TEST(EstimateUtility, LargeKConvergesToVisibility) {
  const Scene s = point_scene({0.2, 0.2}, rho_for_phi(0.25, 0.37));
  ObserverConfig cfg;
  cfg.probe_samples = 10000;
  Rng rng(5);
  EXPECT_NEAR(estimate_utility(s, kQuarter, cfg, {}, rng), 0.37, 0.01);
}

TEST(Answer, IdealObserverIsAlwaysRight) {
  const Scene s = point_scene({0.2, 0.2}, kRhoPhiOne, 4, 3);
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(answer(s, kQuarter, ObserverConfig{}, {}, rng), 3);
}

TEST(Answer, AbstainsOutsideAndWhenUnresolved) {
  Rng rng(7);
  ObserverConfig cfg;
  cfg.hallucination = 0.5;
  const Scene outside = point_scene({0.8, 0.8}, kRhoPhiOne);
  const Scene unresolved = point_scene({0.2, 0.2}, 1e100);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(answer(outside, kQuarter, cfg, {}, rng).has_value());
    EXPECT_FALSE(answer(unresolved, kQuarter, cfg, {}, rng).has_value());
  }
}

TEST(Answer, OracleCropAccuracyAtCalibratedHallucination) {
  // Tight box around the target with phi close to 1.
  const Scene s = point_scene({0.43, 0.61}, 1024.0 / 0.02);
  const Design tight = centered_box(s.target_location, 0.04, 0.04);
  ASSERT_GT(resolution_probability(tight, {}, s.rho_req()), 0.999);
  ObserverConfig cfg;
  cfg.hallucination = 0.32;
  Rng rng(8);
  int correct = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto a = answer(s, tight, cfg, {}, rng);
    correct += a.has_value() && *a == s.target_class;
  }
  EXPECT_NEAR(static_cast<double>(correct) / n, 0.68, 0.02);
}

TEST(Answer, HallucinationPicksWrongClassesUniformly) {
  const Scene s = point_scene({0.2, 0.2}, kRhoPhiOne, 4, 2);
  ObserverConfig cfg;
  cfg.hallucination = 0.999;
  Rng rng(9);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 30000; ++i) ++counts[*answer(s, kQuarter, cfg, {}, rng)];
  EXPECT_LT(counts[2], 100);
  for (int c : {0, 1, 3}) EXPECT_NEAR(counts[c] / 30000.0, 1.0 / 3.0, 0.02);
}

TEST(Probe, RankFidelityWithoutProbeNoise) {
  const Scene s = point_scene({0.3, 0.3}, 20000.0);
  Rng rng(10);
  std::vector<double> expected, visibility;
  for (int i = 0; i < 100; ++i) {
    const double w = rng.uniform(0.05, 0.7);
    const Design d = centered_box({rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5)}, w, w);
    expected.push_back(expected_probe(s, d, ObserverConfig{}, {}));
    visibility.push_back(visibility_probability(s, d, {}));
  }
  EXPECT_DOUBLE_EQ(spearman(expected, visibility), 1.0);
}

TEST(ObserverConfig, Validation) {
  ObserverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.probe_samples = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = ObserverConfig{};
  c.hallucination = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = ObserverConfig{};
  c.false_positive = -0.1;
  EXPECT_THROW(c.validate(), ParameterError);
}
