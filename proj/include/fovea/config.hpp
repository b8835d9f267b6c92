#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fovea/error.hpp"
#include "fovea/observer.hpp"
#include "fovea/scene.hpp"
#include "fovea/search.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

inline constexpr std::string_view kEngineVersion = "fovea 0.1.0";

enum class ExperimentKind {
  eig_validate,
  cliff_demo,
  strategy_bench,
  scaling_sweep,
  calibration,
  failure_decomposition,
  selector_ablation,
};

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::eig_validate: return "eig_validate";
    case ExperimentKind::cliff_demo: return "cliff_demo";
    case ExperimentKind::strategy_bench: return "strategy_bench";
    case ExperimentKind::scaling_sweep: return "scaling_sweep";
    case ExperimentKind::calibration: return "calibration";
    case ExperimentKind::failure_decomposition: return "failure_decomposition";
    case ExperimentKind::selector_ablation: return "selector_ablation";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (ExperimentKind k :
       {ExperimentKind::eig_validate, ExperimentKind::cliff_demo, ExperimentKind::strategy_bench,
        ExperimentKind::scaling_sweep, ExperimentKind::calibration,
        ExperimentKind::failure_decomposition, ExperimentKind::selector_ablation}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

enum class ReportFormat { table, csv, jsonl };

inline std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::table: return "table";
    case ReportFormat::csv: return "csv";
    case ReportFormat::jsonl: return "jsonl";
  }
  return "?";
}

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "table") return ReportFormat::table;
  if (s == "csv") return ReportFormat::csv;
  if (s == "jsonl") return ReportFormat::jsonl;
  throw ConfigError("unknown report format '" + std::string(s) + "'");
}

/// Budget levels for the scaling sweep, one list per strategy family.
struct SweepLevels {
  std::vector<int> greedy_branches{3, 5, 9};
  std::vector<int> mcmc_iters{3, 6, 12};
  std::vector<int> lookahead_branches{1, 3, 5};

  friend bool operator==(const SweepLevels&, const SweepLevels&) = default;
};

/// Information-cliff construction: a small uniform-prior world whose target
/// resolves only in crops below `critical_area`.
struct CliffParams {
  int grid_size = 4;
  int y_cardinality = 2;
  double critical_area = 0.12;

  friend bool operator==(const CliffParams&, const CliffParams&) = default;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::strategy_bench;
  std::uint64_t seed = 0;
  int replicates = 1;
  SuiteParams suite{};
  StrategyConfig strategy{};
  ObserverConfig observer{};
  SensorConfig sensor{};
  SweepLevels sweep{};
  CliffParams cliff{};
  std::string output_dir = "out";
  ReportFormat format = ReportFormat::table;

  void validate() const {
    if (replicates < 1) throw ParameterError("replicates", "must be >= 1");
    suite.validate();
    strategy.validate();
    observer.validate();
    sensor.validate();
    if (cliff.grid_size < 2) throw ParameterError("cliff.grid_size", "must be >= 2");
    if (cliff.y_cardinality < 2) throw ParameterError("cliff.y_cardinality", "must be >= 2");
    if (!(cliff.critical_area > 0.0)) throw ParameterError("cliff.critical_area", "must be > 0");
    for (const auto* levels : {&sweep.greedy_branches, &sweep.mcmc_iters, &sweep.lookahead_branches}) {
      if (levels->empty()) throw ParameterError("sweep", "every family needs at least one level");
      for (int v : *levels) {
        if (v < 1) throw ParameterError("sweep", "levels must be >= 1");
      }
    }
    for (int b : sweep.greedy_branches) {
      if (b > 9) throw ParameterError("sweep.greedy_branches", "at most 9 branches");
    }
    for (int b : sweep.lookahead_branches) {
      if (b > 9) throw ParameterError("sweep.lookahead_branches", "at most 9 branches");
    }
  }
};

/// Tuned starting point for each experiment kind; config files override it.
inline ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  switch (kind) {
    case ExperimentKind::eig_validate:
      s.seed = 1;
      s.suite.count = 200;
      break;
    case ExperimentKind::cliff_demo:
      s.seed = 3;
      s.suite.count = 1;
      break;
    case ExperimentKind::strategy_bench:
      s.seed = 2024;
      s.replicates = 5;
      s.observer.hallucination = 0.32;
      break;
    case ExperimentKind::scaling_sweep:
      s.seed = 77;
      s.replicates = 5;
      s.suite.count = 100;
      s.observer.hallucination = 0.32;
      break;
    case ExperimentKind::calibration:
      // 3x3 belief grid; the feature scale puts phi(one tile) at about 0.999.
      s.seed = 150;
      s.suite.count = 150;
      s.suite.grid_size = 3;
      s.suite.feature_scale_min = 1638.4;
      s.suite.feature_scale_max = 1638.4;
      break;
    case ExperimentKind::failure_decomposition:
      // A single proposal-refine-answer decision per episode.
      s.seed = 2025;
      s.strategy.max_turns = 1;
      s.observer.hallucination = 0.32;
      break;
    case ExperimentKind::selector_ablation:
      // Tiles of the 3x3 pool sit near the resolution threshold.
      s.seed = 50;
      s.suite.feature_scale_min = 6400.0;
      s.suite.feature_scale_max = 12800.0;
      s.observer.hallucination = 0.32;
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON mapping. Readers merge into an existing value and reject unknown keys.

namespace detail {

inline void require_object(const nlohmann::json& j, std::string_view section,
                           std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError("section '" + std::string(section) + "' must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view k : keys) known = known || item.key() == k;
    if (!known) {
      throw ConfigError("unknown key '" + item.key() + "' in section '" + std::string(section) + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, std::string_view section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for '" + std::string(section) + "." + key + "'");
  }
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const SensorConfig& c) {
  return {{"bandwidth", c.bandwidth},
          {"nyquist_threshold", c.nyquist_threshold},
          {"slope", c.slope},
          {"confusion", c.confusion}};
}

inline void merge_json(const nlohmann::json& j, SensorConfig& c) {
  detail::require_object(j, "sensor", {"bandwidth", "nyquist_threshold", "slope", "confusion"});
  detail::read(j, "bandwidth", c.bandwidth, "sensor");
  detail::read(j, "nyquist_threshold", c.nyquist_threshold, "sensor");
  detail::read(j, "slope", c.slope, "sensor");
  detail::read(j, "confusion", c.confusion, "sensor");
}

inline nlohmann::ordered_json to_json(const ObserverConfig& c) {
  return {{"false_positive", c.false_positive},
          {"false_negative", c.false_negative},
          {"hallucination", c.hallucination},
          {"probe_samples", c.probe_samples}};
}

inline void merge_json(const nlohmann::json& j, ObserverConfig& c) {
  detail::require_object(j, "observer",
                         {"false_positive", "false_negative", "hallucination", "probe_samples"});
  detail::read(j, "false_positive", c.false_positive, "observer");
  detail::read(j, "false_negative", c.false_negative, "observer");
  detail::read(j, "hallucination", c.hallucination, "observer");
  detail::read(j, "probe_samples", c.probe_samples, "observer");
}

inline nlohmann::ordered_json to_json(const StrategyConfig& c) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(to_string(c.strategy));
  j["scaling_factors"] = c.scaling_factors;
  j["mcmc_max_iters"] = c.mcmc_max_iters;
  j["mcmc_escape_prob"] = c.mcmc_escape_prob;
  j["mcmc_step_frac"] = c.mcmc_step_frac;
  j["mcmc_epsilon"] = c.mcmc_epsilon;
  j["lookahead_branches"] = c.lookahead_branches;
  j["max_turns"] = c.max_turns;
  j["seed_mode"] = std::string(to_string(c.seed_mode));
  j["proposal_margin"] = c.proposal_margin;
  j["proposal_jitter"] = c.proposal_jitter;
  j["oracle_extent"] = c.oracle_extent;
  return j;
}

inline void merge_json(const nlohmann::json& j, StrategyConfig& c) {
  detail::require_object(j, "strategy",
                         {"strategy", "scaling_factors", "mcmc_max_iters", "mcmc_escape_prob",
                          "mcmc_step_frac", "mcmc_epsilon", "lookahead_branches", "max_turns",
                          "seed_mode", "proposal_margin", "proposal_jitter", "oracle_extent"});
  std::string name;
  detail::read(j, "strategy", name, "strategy");
  if (!name.empty()) c.strategy = parse_strategy(name);
  detail::read(j, "scaling_factors", c.scaling_factors, "strategy");
  detail::read(j, "mcmc_max_iters", c.mcmc_max_iters, "strategy");
  detail::read(j, "mcmc_escape_prob", c.mcmc_escape_prob, "strategy");
  detail::read(j, "mcmc_step_frac", c.mcmc_step_frac, "strategy");
  detail::read(j, "mcmc_epsilon", c.mcmc_epsilon, "strategy");
  detail::read(j, "lookahead_branches", c.lookahead_branches, "strategy");
  detail::read(j, "max_turns", c.max_turns, "strategy");
  std::string mode;
  detail::read(j, "seed_mode", mode, "strategy");
  if (!mode.empty()) c.seed_mode = parse_seed_mode(mode);
  detail::read(j, "proposal_margin", c.proposal_margin, "strategy");
  detail::read(j, "proposal_jitter", c.proposal_jitter, "strategy");
  detail::read(j, "oracle_extent", c.oracle_extent, "strategy");
}

inline nlohmann::ordered_json to_json(const PriorShape& s) {
  return {{"distractor_mass", s.distractor_mass},     {"distractor_spread", s.distractor_spread},
          {"hint_mass", s.hint_mass},                 {"hint_spread", s.hint_spread},
          {"hint_offset", s.hint_offset},             {"informative_mass", s.informative_mass},
          {"min_separation", s.min_separation}};
}

inline void merge_json(const nlohmann::json& j, PriorShape& s) {
  detail::require_object(j, "suite.shape",
                         {"distractor_mass", "distractor_spread", "hint_mass", "hint_spread",
                          "hint_offset", "informative_mass", "min_separation"});
  detail::read(j, "distractor_mass", s.distractor_mass, "suite.shape");
  detail::read(j, "distractor_spread", s.distractor_spread, "suite.shape");
  detail::read(j, "hint_mass", s.hint_mass, "suite.shape");
  detail::read(j, "hint_spread", s.hint_spread, "suite.shape");
  detail::read(j, "hint_offset", s.hint_offset, "suite.shape");
  detail::read(j, "informative_mass", s.informative_mass, "suite.shape");
  detail::read(j, "min_separation", s.min_separation, "suite.shape");
}

inline nlohmann::ordered_json to_json(const SuiteParams& p) {
  nlohmann::ordered_json j;
  j["count"] = p.count;
  j["grid_size"] = p.grid_size;
  j["y_cardinality"] = p.y_cardinality;
  j["misleading_fraction"] = p.misleading_fraction;
  j["uniform_fraction"] = p.uniform_fraction;
  j["feature_scale_min"] = p.feature_scale_min;
  j["feature_scale_max"] = p.feature_scale_max;
  j["distractor_min"] = p.distractor_min;
  j["distractor_max"] = p.distractor_max;
  j["shape"] = to_json(p.shape);
  return j;
}

inline void merge_json(const nlohmann::json& j, SuiteParams& p) {
  detail::require_object(j, "suite",
                         {"count", "grid_size", "y_cardinality", "misleading_fraction",
                          "uniform_fraction", "feature_scale_min", "feature_scale_max",
                          "distractor_min", "distractor_max", "shape"});
  detail::read(j, "count", p.count, "suite");
  detail::read(j, "grid_size", p.grid_size, "suite");
  detail::read(j, "y_cardinality", p.y_cardinality, "suite");
  detail::read(j, "misleading_fraction", p.misleading_fraction, "suite");
  detail::read(j, "uniform_fraction", p.uniform_fraction, "suite");
  detail::read(j, "feature_scale_min", p.feature_scale_min, "suite");
  detail::read(j, "feature_scale_max", p.feature_scale_max, "suite");
  detail::read(j, "distractor_min", p.distractor_min, "suite");
  detail::read(j, "distractor_max", p.distractor_max, "suite");
  if (j.contains("shape")) merge_json(j.at("shape"), p.shape);
}

inline nlohmann::ordered_json to_json(const SweepLevels& s) {
  return {{"greedy_branches", s.greedy_branches},
          {"mcmc_iters", s.mcmc_iters},
          {"lookahead_branches", s.lookahead_branches}};
}

inline void merge_json(const nlohmann::json& j, SweepLevels& s) {
  detail::require_object(j, "sweep", {"greedy_branches", "mcmc_iters", "lookahead_branches"});
  detail::read(j, "greedy_branches", s.greedy_branches, "sweep");
  detail::read(j, "mcmc_iters", s.mcmc_iters, "sweep");
  detail::read(j, "lookahead_branches", s.lookahead_branches, "sweep");
}

inline nlohmann::ordered_json to_json(const CliffParams& c) {
  return {{"grid_size", c.grid_size},
          {"y_cardinality", c.y_cardinality},
          {"critical_area", c.critical_area}};
}

inline void merge_json(const nlohmann::json& j, CliffParams& c) {
  detail::require_object(j, "cliff", {"grid_size", "y_cardinality", "critical_area"});
  detail::read(j, "grid_size", c.grid_size, "cliff");
  detail::read(j, "y_cardinality", c.y_cardinality, "cliff");
  detail::read(j, "critical_area", c.critical_area, "cliff");
}

inline nlohmann::ordered_json to_json(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(s.kind));
  j["seed"] = s.seed;
  j["replicates"] = s.replicates;
  j["suite"] = to_json(s.suite);
  j["strategy"] = to_json(s.strategy);
  j["observer"] = to_json(s.observer);
  j["sensor"] = to_json(s.sensor);
  j["sweep"] = to_json(s.sweep);
  j["cliff"] = to_json(s.cliff);
  j["output_dir"] = s.output_dir;
  j["format"] = std::string(to_string(s.format));
  return j;
}

/// Builds a spec from a config document. Missing keys keep the defaults of
/// `default_spec(kind)`; `kind` falls back to `fallback_kind` when absent.
inline ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentKind fallback_kind) {
  detail::require_object(j, "root",
                         {"kind", "seed", "replicates", "suite", "strategy", "observer", "sensor",
                          "sweep", "cliff", "output_dir", "format"});
  ExperimentKind kind = fallback_kind;
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw ConfigError("'kind' must be a string");
    kind = parse_experiment_kind(j.at("kind").get<std::string>());
  }
  ExperimentSpec s = default_spec(kind);
  try {
    detail::read(j, "seed", s.seed, "root");
    detail::read(j, "replicates", s.replicates, "root");
    if (j.contains("suite")) merge_json(j.at("suite"), s.suite);
    if (j.contains("strategy")) merge_json(j.at("strategy"), s.strategy);
    if (j.contains("observer")) merge_json(j.at("observer"), s.observer);
    if (j.contains("sensor")) merge_json(j.at("sensor"), s.sensor);
    if (j.contains("sweep")) merge_json(j.at("sweep"), s.sweep);
    if (j.contains("cliff")) merge_json(j.at("cliff"), s.cliff);
    detail::read(j, "output_dir", s.output_dir, "root");
    std::string fmt;
    detail::read(j, "format", fmt, "root");
    if (!fmt.empty()) s.format = parse_report_format(fmt);
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline ExperimentSpec load_spec(const std::string& path, ExperimentKind fallback_kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return spec_from_json(j, fallback_kind);
}

}  // namespace fovea
