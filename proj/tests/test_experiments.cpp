#include <gtest/gtest.h>

#include "fovea/experiments.hpp"

using namespace fovea;

namespace {

ExperimentSpec small(ExperimentKind kind, int count = 12, int replicates = 1) {
  ExperimentSpec s = default_spec(kind);
  s.suite.count = count;
  s.replicates = replicates;
  return s;
}

std::vector<std::string> check_names(const MetricsReport& r) {
  std::vector<std::string> out;
  for (const auto& c : r.checks) out.push_back(c.name);
  return out;
}

}  // namespace

TEST(Experiments, EigValidatePassesOnSmallRun) {
  const MetricsReport r = run_experiment(small(ExperimentKind::eig_validate, 40));
  EXPECT_EQ(r.kind, "eig_validate");
  EXPECT_EQ(r.rows.size(), 40u);
  EXPECT_TRUE(r.all_passed()) << render_table(r);
  for (const auto& row : r.rows) {
    EXPECT_GE(row["exact_full_eig"].get<double>() + 1e-12, row["exact_semantic_eig"].get<double>());
  }
}

TEST(Experiments, CliffReportsAllQuantities) {
  const MetricsReport r = run_experiment(default_spec(ExperimentKind::cliff_demo));
  for (const char* q : {"i_wide", "i_zoom", "i_joint", "gap", "i_zoom_if_located"}) {
    EXPECT_NE(r.find("cliff", q), nullptr) << q;
  }
  EXPECT_EQ(check_names(r), (std::vector<std::string>{"individual_gains_small", "joint_gain_large", "gap_positive"}));
  // Joint gain never exceeds the sum of the parts in this world.
  EXPECT_LE(r.value("cliff", "gap"), 1e-12);
}

TEST(Experiments, BenchRowsAndPairs) {
  const MetricsReport r = run_experiment(small(ExperimentKind::strategy_bench, 10, 2));
  EXPECT_EQ(r.rows.size(), 5u * 10u * 2u);
  for (const char* g : {"seed_only", "greedy", "mcmc", "lookahead", "oracle"}) {
    EXPECT_NE(r.find(g, "success"), nullptr) << g;
    EXPECT_NE(r.find(g, "mean_cost"), nullptr) << g;
  }
  EXPECT_NE(r.check("oracle_ceiling"), nullptr);
  EXPECT_NE(r.check("order_seed_only_lt_greedy"), nullptr);
  EXPECT_FALSE(r.cost_axis.empty());
  for (const auto& row : r.rows) {
    EXPECT_EQ(row["cost"].get<long>(), row["probe_calls"].get<long>() + row["observer_calls"].get<long>());
    EXPECT_FALSE(row.contains("trace"));
  }
}

TEST(Experiments, TraceFlagAttachesSteps) {
  const MetricsReport r = run_experiment(small(ExperimentKind::strategy_bench, 3), {.with_trace = true});
  for (const auto& row : r.rows) EXPECT_TRUE(row.contains("trace"));
}

TEST(Experiments, SweepCoversEveryLevel) {
  ExperimentSpec s = small(ExperimentKind::scaling_sweep, 8);
  s.sweep.greedy_branches = {1, 3};
  s.sweep.mcmc_iters = {1, 2};
  s.sweep.lookahead_branches = {1, 2};
  const MetricsReport r = run_experiment(s);
  EXPECT_EQ(r.rows.size(), 6u * 8u);
  for (const char* f : {"greedy", "mcmc", "lookahead"}) {
    EXPECT_NE(r.check(std::string(f) + "_cost_increasing"), nullptr);
    EXPECT_TRUE(r.check(std::string(f) + "_cost_increasing")->passed) << f;
  }
}

TEST(Experiments, CalibrationArms) {
  const MetricsReport r = run_experiment(small(ExperimentKind::calibration, 20));
  EXPECT_EQ(r.rows.size(), 40u);
  EXPECT_TRUE(r.all_passed()) << render_table(r);
}

TEST(Experiments, FailureTaxonomyAddsUp) {
  const MetricsReport r = run_experiment(small(ExperimentKind::failure_decomposition, 30));
  for (const char* g : {"single", "multi9"}) {
    double total = 0.0;
    for (auto c : {FailureCategory::proposal_limited, FailureCategory::search_limited,
                   FailureCategory::reasoning_limited}) {
      total += r.value(g, to_string(c));
    }
    EXPECT_DOUBLE_EQ(total, r.value(g, "failures")) << g;
  }
}

TEST(Experiments, SelectorAblationRows) {
  const MetricsReport r = run_experiment(small(ExperimentKind::selector_ablation, 10, 2));
  EXPECT_EQ(r.rows.size(), 3u * 10u * 2u);
  for (const auto& row : r.rows) {
    const double iou = row["iou"].get<double>();
    EXPECT_GE(iou, 0.0);
    EXPECT_LE(iou, 1.0);
  }
}

TEST(Experiments, Deterministic) {
  for (auto k : {ExperimentKind::strategy_bench, ExperimentKind::calibration, ExperimentKind::selector_ablation}) {
    const ExperimentSpec s = small(k, 6, 2);
    const MetricsReport a = run_experiment(s), b = run_experiment(s);
    EXPECT_EQ(render_jsonl(a), render_jsonl(b));
    EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
  }
}

TEST(Experiments, InvalidSpecRejected) {
  ExperimentSpec s = small(ExperimentKind::strategy_bench);
  s.replicates = 0;
  EXPECT_THROW(run_experiment(s), ParameterError);
  s = small(ExperimentKind::strategy_bench, 0);
  EXPECT_THROW(run_experiment(s), std::exception);
}
