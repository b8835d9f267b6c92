#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fovea/config.hpp"
#include "fovea/metrics.hpp"
#include "fovea/report.hpp"

using namespace fovea;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fovea_test_" + name);
  fs::remove_all(dir);
  return dir;
}

MetricsReport sample_report() {
  MetricsReport r;
  r.kind = "sample";
  r.config = {{"seed", 1}};
  r.cost_axis = "probe calls";
  r.columns = {"name", "x", "flag"};
  r.rows.push_back({{"name", "a"}, {"x", 0.1}, {"flag", true}});
  r.rows.push_back({{"name", "b,c"}, {"x", 1.0 / 3.0}, {"flag", false}});
  r.aggregates.push_back({"g", "mean_x", 0.25, 0.1, 0.4, 2});
  r.aggregates.push_back({"g", "count", 2.0, std::nullopt, std::nullopt, 2});
  r.checks.push_back({"x_positive", true, "ok"});
  return r;
}

}  // namespace

TEST(Config, DefaultConstants) {
  const ExperimentSpec s = default_spec(ExperimentKind::strategy_bench);
  EXPECT_EQ(s.strategy.scaling_factors, (std::vector<double>{1.5, 1.0, 0.8}));
  EXPECT_EQ(s.observer.probe_samples, 3);
  EXPECT_EQ(s.strategy.mcmc_max_iters, 6);
  EXPECT_DOUBLE_EQ(s.strategy.mcmc_escape_prob, 0.1);
  EXPECT_DOUBLE_EQ(s.strategy.mcmc_step_frac, 0.15);
  EXPECT_EQ(s.strategy.max_turns, 10);
  EXPECT_EQ(grid3x3_tiles().size(), 9u);
  EXPECT_NO_THROW(s.validate());
}

TEST(Config, EveryKindHasValidDefaults) {
  for (auto k : {ExperimentKind::eig_validate, ExperimentKind::cliff_demo, ExperimentKind::strategy_bench,
                 ExperimentKind::scaling_sweep, ExperimentKind::calibration,
                 ExperimentKind::failure_decomposition, ExperimentKind::selector_ablation}) {
    const ExperimentSpec s = default_spec(k);
    EXPECT_EQ(s.kind, k);
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  }
}

TEST(Config, JsonRoundTrip) {
  ExperimentSpec s = default_spec(ExperimentKind::scaling_sweep);
  s.seed = 99;
  s.observer.false_negative = 0.2;
  s.strategy.lookahead_branches = 4;
  s.sweep.mcmc_iters = {2, 4};
  s.format = ReportFormat::jsonl;
  const ExperimentSpec back = spec_from_json(nlohmann::json::parse(to_json(s).dump()), ExperimentKind::cliff_demo);
  EXPECT_EQ(back.kind, s.kind);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(back.replicates, s.replicates);
  EXPECT_EQ(back.observer, s.observer);
  EXPECT_EQ(back.strategy, s.strategy);
  EXPECT_EQ(back.sensor, s.sensor);
  EXPECT_EQ(back.sweep, s.sweep);
  EXPECT_EQ(back.cliff, s.cliff);
  EXPECT_EQ(back.format, s.format);
  EXPECT_EQ(to_json(back).dump(), to_json(s).dump());
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto j = nlohmann::json::parse(R"({"observer": {"hallucination": 0.1}})");
  const ExperimentSpec s = spec_from_json(j, ExperimentKind::strategy_bench);
  EXPECT_DOUBLE_EQ(s.observer.hallucination, 0.1);
  EXPECT_EQ(s.seed, default_spec(ExperimentKind::strategy_bench).seed);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"sede": 1})"), ExperimentKind::strategy_bench),
               ConfigError);
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"observer": {"halucination": 0.1}})"),
                              ExperimentKind::strategy_bench),
               ConfigError);
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"seed": "x"})"), ExperimentKind::strategy_bench),
               ConfigError);
  EXPECT_THROW(spec_from_json(nlohmann::json::parse(R"({"kind": "nope"})"), ExperimentKind::strategy_bench),
               ConfigError);
  EXPECT_THROW(load_spec("/nonexistent/fovea.json", ExperimentKind::strategy_bench), ConfigError);
}

TEST(Config, ValidationNamesTheField) {
  ExperimentSpec s = default_spec(ExperimentKind::strategy_bench);
  s.observer.false_positive = 1.5;
  try {
    s.validate();
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_NE(e.field().find("false_positive"), std::string::npos);
  }
}

TEST(Report, CsvHeaderOnlyWhenEmpty) {
  MetricsReport r = sample_report();
  r.rows.clear();
  EXPECT_EQ(render_rows_csv(r), "name,x,flag\n");
}

TEST(Report, CsvQuotesAndFullPrecision) {
  const std::string csv = render_rows_csv(sample_report());
  EXPECT_NE(csv.find("\"b,c\""), std::string::npos);
  EXPECT_NE(csv.find("0.33333333333333331"), std::string::npos);
  EXPECT_DOUBLE_EQ(std::stod("0.33333333333333331"), 1.0 / 3.0);
}

TEST(Report, TableAndSummaryAgree) {
  const MetricsReport r = sample_report();
  const std::string table = render_table(r);
  const std::string csv = render_summary_csv(r);
  EXPECT_NE(table.find("0.250000"), std::string::npos);
  EXPECT_NE(csv.find("g,mean_x,0.25,0.10000000000000001,0.40000000000000002,2"), std::string::npos);
  EXPECT_NE(csv.find("g,count,2,,,2"), std::string::npos);
  EXPECT_NE(table.find("PASS  x_positive"), std::string::npos);
  const auto j = summary_json(r);
  EXPECT_EQ(j["aggregates"][0]["value"].get<double>(), 0.25);
  EXPECT_FALSE(j["aggregates"][1].contains("ci_lo"));
}

TEST(Report, EmitsByteIdenticalFiles) {
  const MetricsReport r = sample_report();
  const fs::path d1 = scratch_dir("emit1"), d2 = scratch_dir("emit2");
  for (auto fmt : {ReportFormat::table, ReportFormat::csv, ReportFormat::jsonl}) {
    const auto p1 = emit_report(r, fmt, d1);
    const auto p2 = emit_report(r, fmt, d2);
    ASSERT_EQ(p1.size(), p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
      EXPECT_EQ(p1[i].filename(), p2[i].filename());
      EXPECT_EQ(slurp(p1[i]), slurp(p2[i]));
      EXPECT_FALSE(fs::exists(fs::path(p1[i]) += ".tmp"));
    }
  }
  EXPECT_EQ(slurp(d1 / "sample.jsonl"), render_jsonl(r));
  EXPECT_TRUE(fs::exists(d1 / "sample_rows.csv"));
  EXPECT_TRUE(fs::exists(d1 / "sample_summary.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Report, UnwritablePathRaisesIoError) {
  const fs::path d = scratch_dir("blocked");
  fs::create_directories(d);
  // A directory where the output file should go makes the rename fail.
  fs::create_directories(d / "sample.txt");
  fs::create_directories(d / "sample.txt" / "keep");
  try {
    emit_report(sample_report(), ReportFormat::table, d);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), (d / "sample.txt").string());
  }
  fs::remove_all(d);
}

TEST(Report, LookupRaisesOnMissingAggregate) {
  const MetricsReport r = sample_report();
  EXPECT_DOUBLE_EQ(r.value("g", "mean_x"), 0.25);
  EXPECT_THROW(r.value("g", "nope"), MisuseError);
  EXPECT_TRUE(r.all_passed());
}

TEST(Metrics, BootstrapCoversTheMeanAndIsDeterministic) {
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(i % 4 == 0 ? 1.0 : 0.0);
  const Interval a = bootstrap_mean_ci(xs);
  const Interval b = bootstrap_mean_ci(xs);
  EXPECT_DOUBLE_EQ(a.estimate, 0.25);
  EXPECT_LT(a.lo, 0.25);
  EXPECT_GT(a.hi, 0.25);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  // Normal approximation of the half width: 1.96 * sqrt(p(1-p)/n) = 0.06.
  EXPECT_NEAR(a.half_width(), 1.96 * std::sqrt(0.25 * 0.75 / 200.0), 0.012);
}

TEST(Metrics, PairedDifference) {
  const std::vector<double> a{0, 0, 1, 0, 1}, b{1, 0, 1, 1, 1};
  const Interval d = paired_bootstrap_ci(a, b);
  EXPECT_DOUBLE_EQ(d.estimate, 0.4);
  EXPECT_GE(d.lo, 0.0);
  EXPECT_THROW(paired_bootstrap_ci(a, {1.0}), ParameterError);
}

TEST(Metrics, RankCorrelation) {
  EXPECT_EQ(average_ranks({3, 1, 2, 2}), (std::vector<double>{4, 1, 2.5, 2.5}));
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 400}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {5, 5, 5}), 0.0);
  // Hand value: ranks (1,2,3,4,5) vs (2,1,4,3,5), sum d^2 = 4, 1 - 6*4/(5*24) = 0.8.
  EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}), 0.8, 1e-12);
}
