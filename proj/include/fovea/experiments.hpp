#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fovea/belief.hpp"
#include "fovea/config.hpp"
#include "fovea/metrics.hpp"
#include "fovea/objective.hpp"
#include "fovea/observer.hpp"
#include "fovea/report.hpp"
#include "fovea/scene.hpp"
#include "fovea/search.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

// Acceptance tolerances shared by the experiment checks and the acceptance binary.
inline constexpr double kExactTolerance = 1e-9;
inline constexpr double kArgmaxAgreementMin = 0.9;
inline constexpr double kCliffIndividualMax = 0.1;
inline constexpr double kCliffJointFraction = 0.9;
inline constexpr double kOracleTarget = 0.68;
inline constexpr double kOracleTolerance = 0.03;
inline constexpr double kCalibrationPositiveMin = 0.9;
inline constexpr double kCalibrationNegativeMax = 0.05;
inline constexpr double kProposalLimitedShareMin = 0.6;
inline constexpr double kProposalLimitedReductionMin = 0.5;

inline constexpr std::string_view kCostAxis =
    "observer queries per episode (probe calls + answer calls), a token-cost proxy";

namespace detail {

inline std::string fmt_num(double v, const char* pattern = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

inline Aggregate ci_aggregate(std::string group, std::string metric, const std::vector<double>& xs) {
  const Interval ci = bootstrap_mean_ci(xs);
  return Aggregate{std::move(group), std::move(metric), ci.estimate, ci.lo, ci.hi,
                   static_cast<long>(xs.size())};
}

inline Aggregate point(std::string group, std::string metric, double value, long n) {
  return Aggregate{std::move(group), std::move(metric), value, std::nullopt, std::nullopt, n};
}

/// Flat episode row. The trace is attached only when requested.
inline nlohmann::ordered_json episode_row(const std::string& condition, int replicate,
                                          const EpisodeRecord& ep, bool with_trace) {
  nlohmann::ordered_json row;
  row["condition"] = condition;
  row["replicate"] = replicate;
  const nlohmann::ordered_json rec = to_json(ep, with_trace);
  for (const auto& [k, v] : rec.items()) row[k] = v;
  row["cost"] = ep.probe_call_count + ep.observer_call_count;
  return row;
}

inline std::vector<std::string> episode_columns() {
  return {"condition",     "replicate",      "scene_seed", "episode_seed", "strategy",
          "seed_mode",     "steps",          "probe_calls", "observer_calls", "cost",
          "final_answer",  "success",        "failure_category"};
}

/// Episodes of one condition over the whole suite, with per-scene mean success
/// (the resampling unit for every interval).
struct ConditionRun {
  std::string name;
  std::vector<EpisodeRecord> episodes;
  std::vector<double> per_scene_success;
  std::vector<double> per_episode_success;
  std::vector<double> per_episode_cost;
};

inline ConditionRun run_condition(const std::string& name, const SceneSuite& suite,
                                  const StrategyConfig& cfg, const ExperimentSpec& spec,
                                  std::vector<nlohmann::ordered_json>& rows, bool with_trace) {
  ConditionRun out;
  out.name = name;
  for (const Scene& scene : suite.scenes) {
    double hits = 0.0;
    for (int r = 0; r < spec.replicates; ++r) {
      const std::uint64_t episode_seed = derive_seed(scene.params.seed, static_cast<std::uint64_t>(r));
      EpisodeRecord ep = run_episode(scene, cfg, spec.observer, spec.sensor, episode_seed);
      hits += ep.success ? 1.0 : 0.0;
      out.per_episode_success.push_back(ep.success ? 1.0 : 0.0);
      out.per_episode_cost.push_back(static_cast<double>(ep.probe_call_count + ep.observer_call_count));
      rows.push_back(episode_row(name, r, ep, with_trace));
      out.episodes.push_back(std::move(ep));
    }
    out.per_scene_success.push_back(hits / spec.replicates);
  }
  return out;
}

inline std::vector<double> dirichlet_ones(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = -std::log(1.0 - rng.uniform());
  normalize_in_place(x);
  return x;
}

inline Design random_design(Rng& rng) {
  const double w = rng.uniform(0.05, 1.0);
  const double h = rng.uniform(0.05, 1.0);
  return Design{rng.uniform(0.0, 1.0 - w), rng.uniform(0.0, 1.0 - h), w, h};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exactness of the surrogate on random small worlds

inline constexpr int kEigCandidates = 8;
inline constexpr double kEigConfusion = 0.1;

inline MetricsReport run_eig_validate(const ExperimentSpec& spec) {
  MetricsReport rep;
  rep.columns = {"scenario",        "grid_size",          "y_cardinality",
                 "critical_area",   "u",                  "v",
                 "w",               "h",                  "j_value",
                 "u_value",         "exact_semantic_eig", "exact_full_eig",
                 "localization",    "semantic_given_location", "gap_surrogate",
                 "gap_decomposition", "semantic_eig_confused", "argmax_agree"};
  double max_gap = 0.0, max_dec = 0.0, max_excess = -INFINITY;
  int agree = 0;
  const int n = spec.suite.count;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(spec.seed, 0xe16, static_cast<std::uint64_t>(i)));
    const int g = 2 + static_cast<int>(rng.index(7));
    const int ny = 2 + static_cast<int>(rng.index(3));
    BeliefState b;
    b.grid_size = g;
    b.spatial = detail::dirichlet_ones(static_cast<std::size_t>(g) * g, rng);
    b.semantic = detail::dirichlet_ones(static_cast<std::size_t>(ny), rng);
    const double a_star = std::exp(rng.uniform(std::log(0.01), 0.0));
    SensorConfig ideal = spec.sensor;
    ideal.confusion = 0.0;
    const double rho = ideal.bandwidth / (ideal.nyquist_threshold * a_star);

    std::vector<Design> cands;
    for (int k = 0; k < kEigCandidates; ++k) cands.push_back(detail::random_design(rng));
    const Design& d = cands.front();

    const UtilityReport u = coverage_resolution(b, d, ideal, rho);
    const double sem = exact_semantic_eig(b, d, ideal, rho);
    const double full = exact_full_eig(b, d, ideal, rho);
    const EigDecomposition dec = eig_decomposition(b, d, ideal, rho);
    const double gap = std::abs(sem - u.u_value);
    const double dgap = std::abs(full - (dec.localization + dec.semantic_given_location));

    SensorConfig confused = ideal;
    confused.confusion = kEigConfusion;
    const double sem_conf = exact_semantic_eig(b, d, confused, rho);

    std::vector<double> j_scores, eig_scores;
    for (const Design& c : cands) {
      j_scores.push_back(coverage_resolution(b, c, confused, rho).j_value);
      eig_scores.push_back(exact_semantic_eig(b, c, confused, rho));
    }
    const bool same = argmax_with_tie_rule(cands, j_scores) == argmax_with_tie_rule(cands, eig_scores);

    max_gap = std::max(max_gap, gap);
    max_dec = std::max(max_dec, dgap);
    max_excess = std::max(max_excess, sem_conf - u.u_value);
    agree += same ? 1 : 0;

    rep.rows.push_back({{"scenario", i},
                        {"grid_size", g},
                        {"y_cardinality", ny},
                        {"critical_area", a_star},
                        {"u", d.u},
                        {"v", d.v},
                        {"w", d.w},
                        {"h", d.h},
                        {"j_value", u.j_value},
                        {"u_value", u.u_value},
                        {"exact_semantic_eig", sem},
                        {"exact_full_eig", full},
                        {"localization", dec.localization},
                        {"semantic_given_location", dec.semantic_given_location},
                        {"gap_surrogate", gap},
                        {"gap_decomposition", dgap},
                        {"semantic_eig_confused", sem_conf},
                        {"argmax_agree", same}});
  }
  const double agreement = static_cast<double>(agree) / n;
  rep.aggregates = {detail::point("all", "max_gap_surrogate", max_gap, n),
                    detail::point("all", "max_gap_decomposition", max_dec, n),
                    detail::point("all", "max_confused_excess", max_excess, n),
                    detail::point("all", "argmax_agreement", agreement, n)};
  rep.checks = {
      {"surrogate_exact_ideal", max_gap <= kExactTolerance,
       "max |I - H*J| = " + detail::fmt_num(max_gap) + " (tol 1e-9)"},
      {"decomposition_exact", max_dec <= kExactTolerance,
       "max |I_full - I_loc - I_sem| = " + detail::fmt_num(max_dec) + " (tol 1e-9)"},
      {"confused_bounded", max_excess <= kExactTolerance,
       "max (I_confused - H*J) = " + detail::fmt_num(max_excess) + " (must be <= 1e-9)"},
      {"argmax_agreement", agreement >= kArgmaxAgreementMin,
       "agreement " + detail::fmt_num(agreement) + " (>= 0.9)"}};
  return rep;
}

// ---------------------------------------------------------------------------
// Wide-then-zoom construction

/// The small uniform world used by the cliff experiment.
inline Scene cliff_scene(const ExperimentSpec& spec) {
  SceneParams p;
  p.grid_size = spec.cliff.grid_size;
  p.y_cardinality = spec.cliff.y_cardinality;
  p.prior_kind = PriorKind::uniform;
  p.distractor_count = 0;
  p.seed = spec.seed;
  p.target_feature_scale =
      spec.sensor.bandwidth / (spec.sensor.nyquist_threshold * spec.cliff.critical_area);
  return generate_scene(p);
}

inline MetricsReport run_cliff_demo(const ExperimentSpec& spec) {
  MetricsReport rep;
  rep.columns = {"quantity", "value"};
  const Scene scene = cliff_scene(spec);
  const BeliefState b = init_belief(scene);
  const Grid grid = scene.grid();
  const Design wide = full_image();
  const Design zoom = grid.cell_rect(scene.target_cell());
  const double rho = scene.rho_req();
  const SuperAdditivity sa = super_additivity_gap(b, wide, zoom, spec.sensor, rho);
  const double h = entropy_bits(b.semantic);
  const double phi_wide = resolution_probability(wide, spec.sensor, rho);
  const double phi_zoom = resolution_probability(zoom, spec.sensor, rho);

  // Zoom information once the location is known exactly (point-mass spatial belief).
  BeliefState located = b;
  std::fill(located.spatial.begin(), located.spatial.end(), 0.0);
  located.spatial[scene.target_cell()] = 1.0;
  const double zoom_if_located = exact_semantic_eig(located, zoom, spec.sensor, rho);

  const std::vector<std::pair<std::string, double>> q = {
      {"semantic_entropy", h},        {"phi_wide", phi_wide},
      {"phi_zoom", phi_zoom},         {"i_wide", sa.i_wide},
      {"i_zoom", sa.i_zoom},          {"i_joint", sa.i_joint},
      {"gap", sa.gap},                {"i_zoom_if_located", zoom_if_located}};
  for (const auto& [name, v] : q) {
    rep.rows.push_back({{"quantity", name}, {"value", v}});
    rep.aggregates.push_back(detail::point("cliff", name, v, 1));
  }
  rep.checks = {
      {"individual_gains_small", sa.i_wide + sa.i_zoom < kCliffIndividualMax,
       "I_wide + I_zoom = " + detail::fmt_num(sa.i_wide + sa.i_zoom) + " (< 0.1 bit)"},
      {"joint_gain_large", sa.i_joint > kCliffJointFraction * h,
       "I_joint = " + detail::fmt_num(sa.i_joint) + " (> 0.9 * H(y) = " +
           detail::fmt_num(kCliffJointFraction * h) + ")"},
      {"gap_positive", sa.gap > 0.0, "gap = " + detail::fmt_num(sa.gap) + " (> 0)"}};
  return rep;
}

// ---------------------------------------------------------------------------
// Strategy benchmark

struct BenchCondition {
  std::string name;
  Strategy strategy;
  SeedMode seed_mode;
};

inline std::vector<BenchCondition> bench_conditions() {
  return {{"seed_only", Strategy::seed_only, SeedMode::single},
          {"greedy", Strategy::greedy, SeedMode::single},
          {"mcmc", Strategy::mcmc, SeedMode::single},
          {"lookahead", Strategy::lookahead, SeedMode::single},
          {"oracle", Strategy::seed_only, SeedMode::oracle}};
}

inline MetricsReport run_strategy_bench(const ExperimentSpec& spec, bool with_trace = false) {
  MetricsReport rep;
  rep.columns = detail::episode_columns();
  rep.cost_axis = std::string(kCostAxis);
  const SceneSuite suite = scene_suite(spec.suite, spec.seed);
  std::vector<detail::ConditionRun> runs;
  for (const auto& c : bench_conditions()) {
    StrategyConfig cfg = spec.strategy;
    cfg.strategy = c.strategy;
    cfg.seed_mode = c.seed_mode;
    runs.push_back(detail::run_condition(c.name, suite, cfg, spec, rep.rows, with_trace));
  }
  for (const auto& r : runs) {
    rep.aggregates.push_back(detail::ci_aggregate(r.name, "success", r.per_scene_success));
    rep.aggregates.push_back(detail::point(r.name, "mean_cost", mean(r.per_episode_cost),
                                           static_cast<long>(r.per_episode_cost.size())));
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const Interval d = paired_bootstrap_ci(runs[k].per_scene_success, runs[k + 1].per_scene_success);
    const std::string group = runs[k + 1].name + "-" + runs[k].name;
    rep.aggregates.push_back(Aggregate{group, "paired_diff", d.estimate, d.lo, d.hi,
                                       static_cast<long>(runs[k].per_scene_success.size())});
    rep.checks.push_back({"order_" + runs[k].name + "_lt_" + runs[k + 1].name,
                          d.estimate > d.half_width(),
                          "diff " + detail::fmt_num(d.estimate, "%.4f") + " vs CI half-width " +
                              detail::fmt_num(d.half_width(), "%.4f")});
  }
  const double oracle = mean(runs.back().per_scene_success);
  rep.checks.push_back({"oracle_ceiling", std::abs(oracle - kOracleTarget) <= kOracleTolerance,
                        "oracle success " + detail::fmt_num(oracle, "%.4f") + " (0.68 +/- 0.03)"});
  return rep;
}

// ---------------------------------------------------------------------------
// Budget sweep

inline MetricsReport run_scaling_sweep(const ExperimentSpec& spec, bool with_trace = false) {
  MetricsReport rep;
  rep.columns = detail::episode_columns();
  rep.columns.insert(rep.columns.begin() + 1, "budget");
  rep.cost_axis = std::string(kCostAxis);
  const SceneSuite suite = scene_suite(spec.suite, spec.seed);

  struct Family {
    std::string name;
    std::vector<int> levels;
    std::function<StrategyConfig(int)> make;
  };
  const std::vector<Family> families = {
      {"greedy", spec.sweep.greedy_branches,
       [&](int b) {
         StrategyConfig c = spec.strategy;
         c.strategy = Strategy::greedy;
         c.scaling_factors = budget_factors(b);
         return c;
       }},
      {"mcmc", spec.sweep.mcmc_iters,
       [&](int it) {
         StrategyConfig c = spec.strategy;
         c.strategy = Strategy::mcmc;
         c.mcmc_max_iters = it;
         return c;
       }},
      {"lookahead", spec.sweep.lookahead_branches,
       [&](int b) {
         StrategyConfig c = spec.strategy;
         c.strategy = Strategy::lookahead;
         c.lookahead_branches = b;
         c.scaling_factors = budget_factors(b);
         return c;
       }},
  };

  for (const Family& f : families) {
    std::vector<double> successes, costs, level_x, pooled_success;
    for (int level : f.levels) {
      const std::string name = f.name + "@" + std::to_string(level);
      const std::size_t first_row = rep.rows.size();
      const auto run = detail::run_condition(name, suite, f.make(level), spec, rep.rows, with_trace);
      for (std::size_t i = first_row; i < rep.rows.size(); ++i) rep.rows[i]["budget"] = level;
      const double s = mean(run.per_episode_success);
      const double c = mean(run.per_episode_cost);
      successes.push_back(s);
      costs.push_back(c);
      for (double x : run.per_episode_success) {
        level_x.push_back(static_cast<double>(level));
        pooled_success.push_back(x);
      }
      auto agg = detail::ci_aggregate(name, "success", run.per_scene_success);
      rep.aggregates.push_back(agg);
      rep.aggregates.push_back(
          detail::point(name, "mean_cost", c, static_cast<long>(run.per_episode_cost.size())));
    }
    bool monotone = true, cost_up = true;
    for (std::size_t i = 1; i < successes.size(); ++i) {
      monotone = monotone && successes[i] >= successes[i - 1];
      cost_up = cost_up && costs[i] > costs[i - 1];
    }
    const double rho = spearman(level_x, pooled_success);
    rep.aggregates.push_back(
        detail::point(f.name, "spearman_budget_success", rho, static_cast<long>(level_x.size())));
    std::string trail;
    for (std::size_t i = 0; i < successes.size(); ++i) {
      trail += (i ? " -> " : "") + detail::fmt_num(successes[i], "%.3f");
    }
    std::string cost_trail;
    for (std::size_t i = 0; i < costs.size(); ++i) {
      cost_trail += (i ? " -> " : "") + detail::fmt_num(costs[i], "%.2f");
    }
    rep.checks.push_back({f.name + "_success_nondecreasing", monotone, "success " + trail});
    rep.checks.push_back({f.name + "_spearman_nonnegative", rho >= 0.0,
                          "spearman " + detail::fmt_num(rho, "%.4f")});
    rep.checks.push_back({f.name + "_cost_increasing", cost_up, "mean cost " + cost_trail});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Posterior calibration after one zoom

inline MetricsReport run_calibration(const ExperimentSpec& spec) {
  MetricsReport rep;
  rep.columns = {"instance", "scene_seed", "arm", "u", "v", "w", "h", "observation",
                 "p_target_prior", "p_viewed_prior", "p_target_post", "p_viewed_post"};
  const SceneSuite suite = scene_suite(spec.suite, spec.seed);
  std::map<std::string, std::vector<double>> series;
  int neg_strict = 0;
  const int n = static_cast<int>(suite.scenes.size());
  for (int i = 0; i < n; ++i) {
    const Scene& scene = suite.scenes[static_cast<std::size_t>(i)];
    const Grid grid = scene.grid();
    const BeliefState b0 = init_belief(scene);
    const auto target_cells = grid.cells_containing(scene.target_location);
    std::size_t heaviest = grid.cells();
    for (std::size_t c = 0; c < grid.cells(); ++c) {
      if (std::find(target_cells.begin(), target_cells.end(), c) != target_cells.end()) continue;
      if (heaviest == grid.cells() || b0.spatial[c] > b0.spatial[heaviest]) heaviest = c;
    }
    Rng rng(derive_seed(scene.params.seed, 0xca1b));
    for (const std::string arm : {"positive", "negative"}) {
      const Design d = grid.cell_rect(arm == "positive" ? scene.target_cell() : heaviest);
      const Observation z = sample_observation(scene, d, spec.sensor, rng).observation;
      const BeliefState b1 = update(b0, d, z, spec.sensor, scene.rho_req());
      const CalibrationMetrics m0 = calibration_metrics(b0, scene, d);
      const CalibrationMetrics m1 = calibration_metrics(b1, scene, d);
      if (arm == "negative" && m1.p_target > m0.p_target) ++neg_strict;
      series[arm + "/p_target_prior"].push_back(m0.p_target);
      series[arm + "/p_viewed_prior"].push_back(m0.p_viewed);
      series[arm + "/p_target_post"].push_back(m1.p_target);
      series[arm + "/p_viewed_post"].push_back(m1.p_viewed);
      rep.rows.push_back({{"instance", i},
                          {"scene_seed", scene.params.seed},
                          {"arm", arm},
                          {"u", d.u},
                          {"v", d.v},
                          {"w", d.w},
                          {"h", d.h},
                          {"observation", z.symbol},
                          {"p_target_prior", m0.p_target},
                          {"p_viewed_prior", m0.p_viewed},
                          {"p_target_post", m1.p_target},
                          {"p_viewed_post", m1.p_viewed}});
    }
  }
  for (const std::string arm : {"positive", "negative"}) {
    for (const std::string m : {"p_target_prior", "p_target_post", "p_viewed_prior", "p_viewed_post"}) {
      rep.aggregates.push_back(detail::ci_aggregate(arm, m, series[arm + "/" + m]));
    }
  }
  const double pt1 = mean(series["positive/p_target_post"]);
  const double pv1 = mean(series["positive/p_viewed_post"]);
  const double nv1 = mean(series["negative/p_viewed_post"]);
  const double strict = static_cast<double>(neg_strict) / n;
  rep.aggregates.push_back(detail::point("negative", "p_target_strict_increase_fraction", strict, n));
  rep.checks = {
      {"positive_target_concentrates", pt1 > kCalibrationPositiveMin,
       "mean P_target after positive zoom " + detail::fmt_num(pt1, "%.4f") + " (> 0.9)"},
      {"positive_viewed_concentrates", pv1 > kCalibrationPositiveMin,
       "mean P_viewed after positive zoom " + detail::fmt_num(pv1, "%.4f") + " (> 0.9)"},
      {"negative_viewed_vanishes", nv1 < kCalibrationNegativeMax,
       "mean P_viewed after negative zoom " + detail::fmt_num(nv1, "%.4f") + " (< 0.05)"},
      {"negative_target_increases", neg_strict == n,
       "P_target strictly increased on " + std::to_string(neg_strict) + " of " + std::to_string(n) +
           " negative updates"}};
  return rep;
}

// ---------------------------------------------------------------------------
// Failure decomposition: single seed vs nine seeds

inline MetricsReport run_failure_decomposition(const ExperimentSpec& spec, bool with_trace = false) {
  MetricsReport rep;
  rep.columns = detail::episode_columns();
  const SceneSuite suite = scene_suite(spec.suite, spec.seed);
  std::vector<detail::ConditionRun> runs;
  for (SeedMode mode : {SeedMode::single, SeedMode::multi9}) {
    StrategyConfig cfg = spec.strategy;
    cfg.seed_mode = mode;
    runs.push_back(detail::run_condition(std::string(to_string(mode)), suite, cfg, spec, rep.rows,
                                         with_trace));
  }
  std::map<std::string, std::map<FailureCategory, int>> counts;
  for (const auto& r : runs) {
    int failures = 0;
    for (const auto& ep : r.episodes) {
      if (!ep.success) {
        ++failures;
        ++counts[r.name][ep.failure_category];
      }
    }
    const long n = static_cast<long>(r.episodes.size());
    rep.aggregates.push_back(detail::ci_aggregate(r.name, "success", r.per_scene_success));
    rep.aggregates.push_back(detail::point(r.name, "failures", failures, n));
    for (FailureCategory c : {FailureCategory::proposal_limited, FailureCategory::search_limited,
                              FailureCategory::reasoning_limited}) {
      rep.aggregates.push_back(detail::point(r.name, std::string(to_string(c)), counts[r.name][c], n));
    }
    const double share =
        failures ? static_cast<double>(counts[r.name][FailureCategory::proposal_limited]) / failures : 0.0;
    rep.aggregates.push_back(detail::point(r.name, "proposal_limited_share", share, failures));
  }
  const double share = rep.value("single", "proposal_limited_share");
  const int pl_single = counts["single"][FailureCategory::proposal_limited];
  const int pl_multi = counts["multi9"][FailureCategory::proposal_limited];
  const double reduction = pl_single ? 1.0 - static_cast<double>(pl_multi) / pl_single : 0.0;
  const double s_single = mean(runs[0].per_episode_success);
  const double s_multi = mean(runs[1].per_episode_success);
  rep.aggregates.push_back(detail::point("multi9-single", "proposal_limited_reduction", reduction, pl_single));
  rep.checks = {
      {"single_proposal_limited_share", share >= kProposalLimitedShareMin,
       "proposal-limited share " + detail::fmt_num(share, "%.3f") + " (>= 0.6)"},
      {"multi9_reduces_proposal_limited", pl_single > 0 && reduction >= kProposalLimitedReductionMin,
       std::to_string(pl_single) + " -> " + std::to_string(pl_multi) + " (reduction " +
           detail::fmt_num(reduction, "%.3f") + ", >= 0.5)"},
      {"multi9_improves_success", s_multi > s_single,
       "success " + detail::fmt_num(s_single, "%.3f") + " -> " + detail::fmt_num(s_multi, "%.3f")}};
  return rep;
}

// ---------------------------------------------------------------------------
// Selector ablation over the nine fixed tiles

inline MetricsReport run_selector_ablation(const ExperimentSpec& spec) {
  MetricsReport rep;
  rep.columns = {"scene_seed", "replicate", "selector", "u", "v", "w", "h", "answer", "correct", "hit", "iou"};
  const SceneSuite suite = scene_suite(spec.suite, spec.seed);
  const std::vector<Design> tiles = grid3x3_tiles();
  const std::vector<std::string> selectors = {"probe", "direct", "random"};
  std::map<std::string, std::vector<double>> acc, hit, iou_v;
  for (const Scene& scene : suite.scenes) {
    const Design oracle = centered_box(scene.target_location, spec.strategy.oracle_extent,
                                       spec.strategy.oracle_extent);
    const Grid grid = scene.grid();
    std::vector<double> prior_cov;
    for (const Design& t : tiles) prior_cov.push_back(coverage(scene.suggested_prior, grid, t));
    std::map<std::string, double> scene_acc, scene_hit, scene_iou;
    for (int r = 0; r < spec.replicates; ++r) {
      const std::uint64_t seed = derive_seed(scene.params.seed, static_cast<std::uint64_t>(r), 0xab1a);
      Rng probe_rng(derive_seed(seed, 1));
      Rng pick_rng(derive_seed(seed, 2));
      const auto scored = score_pool(scene, tiles, spec.observer, spec.sensor, probe_rng);
      std::map<std::string, std::size_t> pick = {
          {"probe", greedy_index(scored)},
          {"direct", argmax_with_tie_rule(tiles, prior_cov)},
          {"random", pick_rng.index(tiles.size())}};
      for (const std::string& s : selectors) {
        const Design& d = tiles[pick[s]];
        Rng answer_rng(derive_seed(seed, 3, pick[s]));
        const auto a = answer(scene, d, spec.observer, spec.sensor, answer_rng);
        const bool correct = a.has_value() && *a == scene.target_class;
        const bool h = d.contains(scene.target_location);
        const double io = iou(d, oracle);
        scene_acc[s] += correct ? 1.0 : 0.0;
        scene_hit[s] += h ? 1.0 : 0.0;
        scene_iou[s] += io;
        rep.rows.push_back({{"scene_seed", scene.params.seed},
                            {"replicate", r},
                            {"selector", s},
                            {"u", d.u},
                            {"v", d.v},
                            {"w", d.w},
                            {"h", d.h},
                            {"answer", a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr)},
                            {"correct", correct},
                            {"hit", h},
                            {"iou", io}});
      }
    }
    for (const std::string& s : selectors) {
      acc[s].push_back(scene_acc[s] / spec.replicates);
      hit[s].push_back(scene_hit[s] / spec.replicates);
      iou_v[s].push_back(scene_iou[s] / spec.replicates);
    }
  }
  for (const std::string& s : selectors) {
    rep.aggregates.push_back(detail::ci_aggregate(s, "accuracy", acc[s]));
    rep.aggregates.push_back(detail::ci_aggregate(s, "hit_rate", hit[s]));
    rep.aggregates.push_back(detail::ci_aggregate(s, "iou", iou_v[s]));
  }
  const double p = mean(acc["probe"]), dsel = mean(acc["direct"]), rnd = mean(acc["random"]);
  rep.checks = {
      {"probe_beats_direct", p > dsel,
       "accuracy " + detail::fmt_num(p, "%.3f") + " vs " + detail::fmt_num(dsel, "%.3f")},
      {"probe_beats_random", p > rnd,
       "accuracy " + detail::fmt_num(p, "%.3f") + " vs " + detail::fmt_num(rnd, "%.3f")}};
  return rep;
}

// ---------------------------------------------------------------------------

struct RunOptions {
  bool with_trace = false;  // attach per-step traces to episode rows
};

/// Runs one experiment. Validates the spec first; wall time is recorded on
/// the report but never written to output files.
inline MetricsReport run_experiment(const ExperimentSpec& spec, RunOptions opts = {}) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  MetricsReport rep;
  switch (spec.kind) {
    case ExperimentKind::eig_validate: rep = run_eig_validate(spec); break;
    case ExperimentKind::cliff_demo: rep = run_cliff_demo(spec); break;
    case ExperimentKind::strategy_bench: rep = run_strategy_bench(spec, opts.with_trace); break;
    case ExperimentKind::scaling_sweep: rep = run_scaling_sweep(spec, opts.with_trace); break;
    case ExperimentKind::calibration: rep = run_calibration(spec); break;
    case ExperimentKind::failure_decomposition:
      rep = run_failure_decomposition(spec, opts.with_trace);
      break;
    case ExperimentKind::selector_ablation: rep = run_selector_ablation(spec); break;
  }
  rep.kind = std::string(to_string(spec.kind));
  rep.config = to_json(spec);
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace fovea
