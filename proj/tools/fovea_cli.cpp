#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fovea/fovea.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheckFailed = 3;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> replicates;
  std::optional<std::string> format;
  bool check = false;
  bool trace = false;
};

fovea::ExperimentSpec resolve_spec(const GlobalOptions& g, fovea::ExperimentKind kind) {
  fovea::ExperimentSpec spec =
      g.config.empty() ? fovea::default_spec(kind) : fovea::load_spec(g.config, kind);
  if (spec.kind != kind) {
    throw fovea::ConfigError("config declares kind '" + std::string(fovea::to_string(spec.kind)) +
                             "' but the subcommand runs '" + std::string(fovea::to_string(kind)) + "'");
  }
  if (g.seed) spec.seed = *g.seed;
  if (g.out) spec.output_dir = *g.out;
  if (g.replicates) spec.replicates = *g.replicates;
  if (g.format) spec.format = fovea::parse_report_format(*g.format);
  try {
    spec.validate();
  } catch (const fovea::ParameterError& e) {
    throw fovea::ConfigError(e.what());
  }
  return spec;
}

int run_kind(const GlobalOptions& g, fovea::ExperimentKind kind) {
  const fovea::ExperimentSpec spec = resolve_spec(g, kind);
  const fovea::MetricsReport report = fovea::run_experiment(spec, {.with_trace = g.trace});
  std::cout << fovea::render_table(report);
  for (const auto& path : fovea::emit_report(report, spec.format, spec.output_dir)) {
    std::cout << "wrote " << path.string() << "\n";
  }
  std::fprintf(stderr, "wall time %.2f s\n", report.wall_seconds);
  if (g.check && !report.all_passed()) return kExitCheckFailed;
  return kExitOk;
}

struct RunOptions {
  std::string strategy = "greedy";
  std::string seed_mode = "single";
  int scene_index = 0;
  int replicate = 0;
};

// Single episode on one scene of the benchmark suite; prints the full record.
int run_single(const GlobalOptions& g, const RunOptions& r) {
  fovea::ExperimentSpec spec = resolve_spec(g, fovea::ExperimentKind::strategy_bench);
  try {
    spec.strategy.strategy = fovea::parse_strategy(r.strategy);
    spec.strategy.seed_mode = fovea::parse_seed_mode(r.seed_mode);
  } catch (const fovea::ParameterError& e) {
    throw fovea::ConfigError(e.what());
  }
  if (r.scene_index < 0 || r.scene_index >= spec.suite.count) {
    throw fovea::ConfigError("--scene must be in [0, suite.count)");
  }
  fovea::SuiteParams one = spec.suite;
  const fovea::SceneSuite suite = fovea::scene_suite(one, spec.seed);
  const fovea::Scene& scene = suite.scenes[static_cast<std::size_t>(r.scene_index)];
  const std::uint64_t episode_seed =
      fovea::derive_seed(scene.params.seed, static_cast<std::uint64_t>(r.replicate));
  const fovea::EpisodeRecord ep =
      fovea::run_episode(scene, spec.strategy, spec.observer, spec.sensor, episode_seed);
  nlohmann::ordered_json j;
  j["scene"] = fovea::to_json(scene);
  j["episode"] = fovea::to_json(ep, true);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foveated visual search simulator and experiment driver"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--replicates", g.replicates, "Replicates per scene");
  app.add_option("--format", g.format, "Report format: table, csv or jsonl");
  app.add_flag("--check", g.check, "Exit with code 3 when an acceptance check fails");
  app.add_flag("--trace", g.trace, "Attach per-step traces to episode rows");

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one episode and print its trace");
  run->add_option("--strategy", run_opts.strategy, "seed_only, greedy, mcmc or lookahead");
  run->add_option("--seed-mode", run_opts.seed_mode, "single, multi9, grid3x3 or oracle");
  run->add_option("--scene", run_opts.scene_index, "Scene index within the suite");
  run->add_option("--replicate", run_opts.replicate, "Replicate index");

  struct Sub {
    const char* name;
    const char* help;
    fovea::ExperimentKind kind;
  };
  const Sub subs[] = {
      {"bench", "Strategy benchmark", fovea::ExperimentKind::strategy_bench},
      {"sweep", "Budget sweep per strategy family", fovea::ExperimentKind::scaling_sweep},
      {"cliff", "Wide-then-zoom information construction", fovea::ExperimentKind::cliff_demo},
      {"validate-eig", "Exact information gain vs the surrogate", fovea::ExperimentKind::eig_validate},
      {"calibrate", "Posterior calibration after one zoom", fovea::ExperimentKind::calibration},
      {"decompose-failures", "Failure taxonomy, single vs nine seeds",
       fovea::ExperimentKind::failure_decomposition},
      {"ablate-selector", "Crop selector ablation", fovea::ExperimentKind::selector_ablation},
  };
  std::vector<std::pair<CLI::App*, fovea::ExperimentKind>> experiment_cmds;
  for (const Sub& s : subs) experiment_cmds.emplace_back(app.add_subcommand(s.name, s.help), s.kind);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_single(g, run_opts);
    for (const auto& [cmd, kind] : experiment_cmds) {
      if (*cmd) return run_kind(g, kind);
    }
  } catch (const fovea::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fovea::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fovea::EmptySuiteError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
