#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fovea/belief.hpp"
#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/grid.hpp"
#include "fovea/objective.hpp"
#include "fovea/observer.hpp"
#include "fovea/rng.hpp"
#include "fovea/scene.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

enum class Strategy { greedy, mcmc, lookahead, seed_only };
enum class SeedMode { single, multi9, grid3x3, oracle };
enum class FailureCategory { none, proposal_limited, search_limited, reasoning_limited };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::greedy: return "greedy";
    case Strategy::mcmc: return "mcmc";
    case Strategy::lookahead: return "lookahead";
    case Strategy::seed_only: return "seed_only";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  if (s == "greedy") return Strategy::greedy;
  if (s == "mcmc") return Strategy::mcmc;
  if (s == "lookahead") return Strategy::lookahead;
  if (s == "seed_only") return Strategy::seed_only;
  throw ParameterError("strategy", "unknown strategy '" + std::string(s) + "'");
}

inline std::string_view to_string(SeedMode m) {
  switch (m) {
    case SeedMode::single: return "single";
    case SeedMode::multi9: return "multi9";
    case SeedMode::grid3x3: return "grid3x3";
    case SeedMode::oracle: return "oracle";
  }
  return "?";
}

inline SeedMode parse_seed_mode(std::string_view s) {
  if (s == "single") return SeedMode::single;
  if (s == "multi9") return SeedMode::multi9;
  if (s == "grid3x3") return SeedMode::grid3x3;
  if (s == "oracle") return SeedMode::oracle;
  throw ParameterError("seed_mode", "unknown seed mode '" + std::string(s) + "'");
}

inline std::string_view to_string(FailureCategory c) {
  switch (c) {
    case FailureCategory::none: return "none";
    case FailureCategory::proposal_limited: return "proposal_limited";
    case FailureCategory::search_limited: return "search_limited";
    case FailureCategory::reasoning_limited: return "reasoning_limited";
  }
  return "?";
}

struct StrategyConfig {
  Strategy strategy = Strategy::greedy;
  std::vector<double> scaling_factors{1.5, 1.0, 0.8};
  int mcmc_max_iters = 6;
  double mcmc_escape_prob = 0.1;
  double mcmc_step_frac = 0.15;
  double mcmc_epsilon = 1e-6;
  int lookahead_branches = 3;
  int max_turns = 10;
  SeedMode seed_mode = SeedMode::single;
  // Simulated proposal noise: the proposed cell is grown by `proposal_margin`
  // on each side and its centre shifted by U(-jitter, jitter) per axis.
  double proposal_margin = 0.08;
  double proposal_jitter = 0.04;
  double oracle_extent = 0.04;  // side of the tight box used by SeedMode::oracle

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;

  void validate() const {
    if (scaling_factors.empty()) throw ParameterError("scaling_factors", "must be nonempty");
    for (double c : scaling_factors) {
      if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("scaling_factors", "entries must be > 0");
    }
    if (mcmc_max_iters < 1) throw ParameterError("mcmc_max_iters", "must be >= 1");
    if (!(mcmc_escape_prob >= 0.0 && mcmc_escape_prob <= 1.0)) {
      throw ParameterError("mcmc_escape_prob", "must be in [0, 1]");
    }
    if (!(mcmc_step_frac > 0.0)) throw ParameterError("mcmc_step_frac", "must be > 0");
    if (!(mcmc_epsilon >= 0.0)) throw ParameterError("mcmc_epsilon", "must be >= 0");
    if (lookahead_branches < 1) throw ParameterError("lookahead_branches", "must be >= 1");
    if (max_turns < 1) throw ParameterError("max_turns", "must be >= 1");
    if (!(proposal_margin >= 0.0)) throw ParameterError("proposal_margin", "must be >= 0");
    if (!(proposal_jitter >= 0.0)) throw ParameterError("proposal_jitter", "must be >= 0");
    if (!(oracle_extent > 0.0 && oracle_extent <= 1.0)) {
      throw ParameterError("oracle_extent", "must be in (0, 1]");
    }
  }
};

/// First n entries of a fixed priority list of rescale factors, in descending
/// order. budget_factors(3) is the default {1.5, 1.0, 0.8}.
inline std::vector<double> budget_factors(int n) {
  static constexpr double kPriority[] = {1.0, 1.5, 0.8, 2.0, 0.6, 1.25, 0.7, 2.5, 0.5};
  constexpr int kMax = static_cast<int>(std::size(kPriority));
  if (n < 1 || n > kMax) throw ParameterError("budget", "must be in [1, 9]");
  std::vector<double> out(kPriority, kPriority + n);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// ---------------------------------------------------------------------------
// Candidate generation

/// Centre-preserving rescale by each factor, clamped into `bounds`. Order
/// follows `factors`; duplicates after clamping keep their first occurrence.
inline std::vector<Design> perturb_candidates(const Design& seed, const std::vector<double>& factors,
                                              const Design& bounds = full_image()) {
  std::vector<Design> out;
  const Point c = seed.center();
  for (double f : factors) {
    const double w = seed.w * f;
    const double h = seed.h * f;
    const Design d = clamp_to(Design{c.x - 0.5 * w, c.y - 0.5 * h, w, h}, bounds);
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  return out;
}

/// Noisy proposal around a grid cell.
inline Design proposal_crop(const Grid& grid, std::size_t cell, const StrategyConfig& cfg, Rng& rng) {
  const Point c = grid.cell_center(cell);
  const double jx = rng.uniform(-cfg.proposal_jitter, cfg.proposal_jitter);
  const double jy = rng.uniform(-cfg.proposal_jitter, cfg.proposal_jitter);
  const double side = grid.cell_extent() + 2.0 * cfg.proposal_margin;
  return centered_box(Point{c.x + jx, c.y + jy}, side, side);
}

namespace detail {

inline std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  const double total = stable_sum(weights);
  if (!(total > 0.0)) return rng.index(weights.size());
  double r = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0 && weights[i] > 0.0) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace detail

inline std::vector<Design> grid3x3_tiles() {
  std::vector<Design> out;
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) out.push_back(Design{i / 3.0, j / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  }
  return out;
}

inline constexpr double kMulti9TopMass = 0.95;

/// Seed proposals from a spatial belief.
///   single  - one noisy crop around a cell drawn in proportion to its mass
///   multi9  - nine such crops, cells drawn without replacement from the cells
///             holding the top 95% of mass; cells already inside an earlier
///             crop are suppressed
///   grid3x3 - the nine fixed tiles
///   oracle  - a tight box around the true target
inline std::vector<Design> seed_pool(const Scene& scene, const std::vector<double>& spatial,
                                     SeedMode mode, const StrategyConfig& cfg, Rng& rng) {
  const Grid grid(scene.params.grid_size);
  switch (mode) {
    case SeedMode::single:
      return {proposal_crop(grid, detail::sample_index(spatial, rng), cfg, rng)};
    case SeedMode::grid3x3:
      return grid3x3_tiles();
    case SeedMode::oracle:
      return {centered_box(scene.target_location, cfg.oracle_extent, cfg.oracle_extent)};
    case SeedMode::multi9: {
      std::vector<std::size_t> order(grid.cells());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return spatial[a] > spatial[b]; });
      std::vector<double> weights(grid.cells(), 0.0);
      double acc = 0.0;
      for (std::size_t i : order) {
        if (acc >= kMulti9TopMass) break;
        weights[i] = spatial[i];
        acc += spatial[i];
      }
      std::vector<Design> out;
      while (out.size() < 9) {
        if (!(stable_sum(weights) > 0.0)) {
          // Top cells exhausted: fall back to every cell not yet suppressed.
          bool any = false;
          for (std::size_t i = 0; i < grid.cells(); ++i) {
            bool covered = false;
            for (const Design& d : out) covered = covered || d.contains(grid.cell_center(i));
            weights[i] = covered ? 0.0 : std::max(spatial[i], 1e-300);
            any = any || !covered;
          }
          if (!any) std::fill(weights.begin(), weights.end(), 1.0);
        }
        const std::size_t cell = detail::sample_index(weights, rng);
        const Design d = proposal_crop(grid, cell, cfg, rng);
        weights[cell] = 0.0;
        if (std::find(out.begin(), out.end(), d) != out.end()) continue;
        out.push_back(d);
        for (std::size_t i = 0; i < grid.cells(); ++i) {
          if (weights[i] > 0.0 && d.contains(grid.cell_center(i))) weights[i] = 0.0;
        }
      }
      return out;
    }
  }
  throw ParameterError("seed_mode", "unhandled seed mode");
}

/// Seeds drawn from the scene's suggested prior.
inline std::vector<Design> seed_pool(const Scene& scene, SeedMode mode, const StrategyConfig& cfg,
                                     Rng& rng) {
  return seed_pool(scene, scene.suggested_prior, mode, cfg, rng);
}

// ---------------------------------------------------------------------------
// Selection

struct ScoredDesign {
  Design design;
  double score = 0.0;

  friend bool operator==(const ScoredDesign&, const ScoredDesign&) = default;
};

/// Argmax of the score; ties go to the smaller area, then the
/// lexicographically smaller design.
inline std::size_t greedy_index(const std::vector<ScoredDesign>& scored) {
  if (scored.empty()) throw PoolError("greedy_select called on an empty pool");
  std::vector<Design> designs;
  designs.reserve(scored.size());
  for (const auto& s : scored) designs.push_back(s.design);
  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const auto& s : scored) scores.push_back(s.score);
  return argmax_with_tie_rule(designs, scores, 0.0);
}

inline Design greedy_select(const std::vector<ScoredDesign>& scored) {
  return scored[greedy_index(scored)].design;
}

/// Probe every design; returns the scored pool.
inline std::vector<ScoredDesign> score_pool(const Scene& scene, const std::vector<Design>& pool,
                                            const ObserverConfig& obs, const SensorConfig& sensor,
                                            Rng& rng) {
  std::vector<ScoredDesign> out;
  out.reserve(pool.size());
  for (const Design& d : pool) out.push_back({d, estimate_utility(scene, d, obs, sensor, rng)});
  return out;
}

// ---------------------------------------------------------------------------
// MCMC refinement

struct McmcStep {
  Design design;
  double score = 0.0;
  double alpha = 1.0;
  bool accepted = true;
  bool escaped = false;  // accepted only through the escape rule

  friend bool operator==(const McmcStep&, const McmcStep&) = default;
};

struct McmcResult {
  Design best;
  double best_score = 0.0;
  std::vector<McmcStep> trace;  // first entry is the initial state
  int probe_calls = 0;
};

/// Metropolis acceptance ratio for the probe-score target.
inline double mcmc_acceptance(double proposed, double current, double epsilon) {
  return std::min(1.0, (proposed + epsilon) / (current + epsilon));
}

/// Gaussian-proposal refinement of `init`. The initial state is scored here
/// unless `init_score` is given (already probed). Returns the best state seen.
inline McmcResult mcmc_refine(const Scene& scene, const Design& init, const StrategyConfig& cfg,
                              const ObserverConfig& obs, const SensorConfig& sensor, Rng& rng,
                              std::optional<double> init_score = std::nullopt) {
  McmcResult res;
  double current_score;
  if (init_score) {
    current_score = *init_score;
  } else {
    current_score = estimate_utility(scene, init, obs, sensor, rng);
    res.probe_calls += obs.probe_samples;
  }
  Design current = init;
  res.trace.push_back(McmcStep{init, current_score, 1.0, true, false});
  res.best = init;
  res.best_score = current_score;
  if (current_score >= 1.0) return res;

  for (int it = 0; it < cfg.mcmc_max_iters; ++it) {
    const double su = cfg.mcmc_step_frac * current.w;
    const double sv = cfg.mcmc_step_frac * current.h;
    const Design proposal = clamp_to(Design{current.u + rng.normal(0.0, su),
                                            current.v + rng.normal(0.0, sv),
                                            current.w + rng.normal(0.0, su),
                                            current.h + rng.normal(0.0, sv)});
    const double score = estimate_utility(scene, proposal, obs, sensor, rng);
    res.probe_calls += obs.probe_samples;
    const double alpha = mcmc_acceptance(score, current_score, cfg.mcmc_epsilon);
    bool accepted = rng.bernoulli(alpha);
    bool escaped = false;
    if (!accepted && rng.bernoulli(cfg.mcmc_escape_prob)) {
      accepted = true;
      escaped = true;
    }
    res.trace.push_back(McmcStep{proposal, score, alpha, accepted, escaped});
    if (accepted) {
      current = proposal;
      current_score = score;
    }
    const bool better = score > res.best_score ||
                        (score == res.best_score &&
                         (proposal.area() < res.best.area() ||
                          (proposal.area() == res.best.area() && proposal < res.best)));
    if (better) {
      res.best = proposal;
      res.best_score = score;
    }
    if (score >= 1.0) break;
  }
  return res;
}

// ---------------------------------------------------------------------------
// One-step lookahead

struct LookaheadBranch {
  Design root;
  double root_score = 0.0;
  Observation simulated;
  bool valid = false;
  Design next;
  std::vector<ScoredDesign> leaves;
  double value = 0.0;  // mean leaf score, 0 when invalid
};

struct LookaheadResult {
  Design selected;
  std::size_t selected_branch = 0;
  std::vector<LookaheadBranch> tree;
  int probe_calls = 0;
  int observer_calls = 0;
};

/// Highest-coverage sub-crop of half the root's extent, placed on grid lines
/// (plus the root's far edges) inside the root.
inline Design best_subcrop(const BeliefState& b, const Design& root) {
  const Grid grid = b.grid();
  const CoverageTable table(b);
  const double w = 0.5 * root.w;
  const double h = 0.5 * root.h;
  auto positions = [&](double lo, double extent, double span) {
    std::vector<double> out{lo};
    const double hi = lo + span - extent;
    const double e = grid.cell_extent();
    for (int k = static_cast<int>(std::ceil(lo / e)); k * e <= hi + 1e-12; ++k) {
      const double p = std::min(k * e, hi);
      if (p > lo) out.push_back(p);
    }
    if (hi > out.back()) out.push_back(hi);
    return out;
  };
  std::vector<Design> subs;
  for (double v : positions(root.v, h, root.h)) {
    for (double u : positions(root.u, w, root.w)) subs.push_back(clamp_to(Design{u, v, w, h}));
  }
  const std::size_t best =
      argmax_with_tie_rule(subs, [&](const Design& d) { return table.coverage(d); });
  return subs[best];
}

/// Expands the top `lookahead_branches` roots (by probe score). Each branch
/// simulates the root's observation, predicts the next move on a scratch
/// belief, and scores it by the mean probe score of its leaf pool.
inline LookaheadResult lookahead_select(const Scene& scene, const BeliefState& belief,
                                        const std::vector<ScoredDesign>& roots,
                                        const StrategyConfig& cfg, const ObserverConfig& obs,
                                        const SensorConfig& sensor, Rng& rng) {
  if (roots.empty()) throw PoolError("lookahead_select called on an empty pool");
  // Rank roots by score with the greedy tie rule.
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = roots[a];
    const auto& y = roots[b];
    if (x.score != y.score) return x.score > y.score;
    if (x.design.area() != y.design.area()) return x.design.area() < y.design.area();
    return x.design < y.design;
  });
  const std::size_t n = std::min<std::size_t>(order.size(), static_cast<std::size_t>(cfg.lookahead_branches));

  LookaheadResult res;
  const int noise = noise_symbol(scene.params.y_cardinality);
  for (std::size_t k = 0; k < n; ++k) {
    LookaheadBranch br;
    br.root = roots[order[k]].design;
    br.root_score = roots[order[k]].score;
    br.simulated = sample_observation(scene, br.root, sensor, rng).observation;
    ++res.observer_calls;
    br.valid = !(br.simulated.symbol == noise && br.root_score == 0.0);
    if (br.valid) {
      try {
        const BeliefState scratch = update(belief, br.root, br.simulated, sensor, scene.rho_req());
        br.next = best_subcrop(scratch, br.root);
      } catch (const DegenerateUpdateError&) {
        br.valid = false;
      }
    }
    if (br.valid) {
      br.leaves = score_pool(scene, perturb_candidates(br.next, cfg.scaling_factors), obs, sensor, rng);
      res.probe_calls += static_cast<int>(br.leaves.size()) * obs.probe_samples;
      double sum = 0.0;
      for (const auto& l : br.leaves) sum += l.score;
      br.value = sum / static_cast<double>(br.leaves.size());
    }
    res.tree.push_back(std::move(br));
  }
  // Equal values fall back to the greedy order: root score, then area, then
  // lexicographic. Branches are already in that order.
  res.selected_branch = 0;
  for (std::size_t k = 1; k < res.tree.size(); ++k) {
    if (res.tree[k].value > res.tree[res.selected_branch].value) res.selected_branch = k;
  }
  res.selected = res.tree[res.selected_branch].root;
  return res;
}

// ---------------------------------------------------------------------------
// Refinement step and episode loop

/// Independent random streams for one turn, derived from the episode seed so
/// that conditions sharing a seed share seeds, executions and answers.
struct TurnStreams {
  Rng seeds;
  Rng probes;
  Rng execute;
  Rng answer;

  TurnStreams(std::uint64_t episode_seed, int turn)
      : seeds(derive_seed(episode_seed, 0x5eed, static_cast<std::uint64_t>(turn))),
        probes(derive_seed(episode_seed, 0x970be, static_cast<std::uint64_t>(turn))),
        execute(derive_seed(episode_seed, 0xe7ec, static_cast<std::uint64_t>(turn))),
        answer(derive_seed(episode_seed, 0xa45e, static_cast<std::uint64_t>(turn))) {}
};

struct StepRecord {
  int turn = 0;
  std::vector<Design> seeds;
  std::vector<ScoredDesign> pool;
  std::vector<McmcStep> mcmc;
  std::vector<LookaheadBranch> lookahead;
  Design selected;
  double selected_score = 0.0;
  Observation observation;
  std::optional<int> answer;
  int probe_calls = 0;
  int observer_calls = 0;
};

struct RefineResult {
  Design design;
  double score = 0.0;
  Observation observation;
  BeliefState belief;            // history extended by one entry
  std::optional<Design> pending;  // lookahead's predicted next move
  StepRecord step;
};

/// One perception step: build the pool from the seeds, select by the
/// configured strategy, execute the selection and update the belief.
inline RefineResult fovea_refine(const Scene& scene, const std::vector<Design>& seeds,
                                 const BeliefState& belief, const StrategyConfig& cfg,
                                 const ObserverConfig& obs, const SensorConfig& sensor,
                                 Rng& probe_rng, Rng& execute_rng) {
  if (seeds.empty()) throw PoolError("no seed proposals");
  RefineResult res;
  StepRecord& st = res.step;
  st.turn = belief.step;
  st.seeds = seeds;

  std::vector<Design> pool;
  if (cfg.strategy == Strategy::seed_only) {
    pool = seeds;
  } else {
    for (const Design& s : seeds) {
      for (const Design& d : perturb_candidates(s, cfg.scaling_factors)) {
        if (std::find(pool.begin(), pool.end(), d) == pool.end()) pool.push_back(d);
      }
    }
  }
  st.pool = score_pool(scene, pool, obs, sensor, probe_rng);
  st.probe_calls += static_cast<int>(pool.size()) * obs.probe_samples;
  const std::size_t g = greedy_index(st.pool);
  res.design = st.pool[g].design;
  res.score = st.pool[g].score;

  switch (cfg.strategy) {
    case Strategy::seed_only:
    case Strategy::greedy:
      break;
    case Strategy::mcmc: {
      McmcResult m = mcmc_refine(scene, res.design, cfg, obs, sensor, probe_rng, res.score);
      st.probe_calls += m.probe_calls;
      st.mcmc = std::move(m.trace);
      res.design = m.best;
      res.score = m.best_score;
      break;
    }
    case Strategy::lookahead: {
      LookaheadResult l = lookahead_select(scene, belief, st.pool, cfg, obs, sensor, probe_rng);
      st.probe_calls += l.probe_calls;
      st.observer_calls += l.observer_calls;
      const LookaheadBranch& chosen = l.tree[l.selected_branch];
      res.design = chosen.root;
      res.score = chosen.root_score;
      if (chosen.valid && chosen.value > 0.0) res.pending = chosen.next;
      st.lookahead = std::move(l.tree);
      break;
    }
  }

  res.observation = sample_observation(scene, res.design, sensor, execute_rng).observation;
  ++st.observer_calls;
  res.belief = update(belief, res.design, res.observation, sensor, scene.rho_req(), res.score);
  st.selected = res.design;
  st.selected_score = res.score;
  st.observation = res.observation;
  return res;
}

struct EpisodeRecord {
  std::uint64_t scene_seed = 0;
  std::uint64_t episode_seed = 0;
  Strategy strategy = Strategy::greedy;
  SeedMode seed_mode = SeedMode::single;
  std::vector<StepRecord> steps;
  long probe_call_count = 0;
  long observer_call_count = 0;
  std::optional<int> final_answer;
  bool success = false;
  FailureCategory failure_category = FailureCategory::none;
};

/// Taxonomy of an unsuccessful episode. Pooled candidates include MCMC
/// proposals; lookahead leaves are predictions and do not count.
inline FailureCategory classify_failure(const EpisodeRecord& ep, const Scene& scene) {
  if (ep.success) throw MisuseError("classify_failure called on a successful episode");
  const Point l = scene.target_location;
  bool pooled = false;
  bool selected = false;
  for (const StepRecord& st : ep.steps) {
    for (const auto& c : st.pool) pooled = pooled || c.design.contains(l);
    for (const auto& m : st.mcmc) pooled = pooled || m.design.contains(l);
    selected = selected || st.selected.contains(l);
  }
  if (!pooled) return FailureCategory::proposal_limited;
  if (!selected) return FailureCategory::search_limited;
  return FailureCategory::reasoning_limited;
}

/// Seed proposal, refinement and answer attempt per turn, until the observer
/// commits to an answer or the turn budget runs out.
inline EpisodeRecord run_episode(const Scene& scene, const StrategyConfig& cfg,
                                 const ObserverConfig& obs, const SensorConfig& sensor,
                                 std::uint64_t episode_seed) {
  cfg.validate();
  obs.validate();
  sensor.validate();
  EpisodeRecord ep;
  ep.scene_seed = scene.params.seed;
  ep.episode_seed = episode_seed;
  ep.strategy = cfg.strategy;
  ep.seed_mode = cfg.seed_mode;

  BeliefState belief = init_belief(scene);
  std::optional<Design> pending;
  for (int turn = 0; turn < cfg.max_turns; ++turn) {
    TurnStreams rs(episode_seed, turn);
    std::vector<Design> seeds;
    if (pending) {
      seeds.push_back(*pending);
    } else {
      seeds = seed_pool(scene, belief.spatial, cfg.seed_mode, cfg, rs.seeds);
    }
    RefineResult r = fovea_refine(scene, seeds, belief, cfg, obs, sensor, rs.probes, rs.execute);
    belief = std::move(r.belief);
    pending = r.pending;
    r.step.turn = turn;
    r.step.answer = answer(scene, r.design, obs, sensor, rs.answer);
    ++r.step.observer_calls;
    ep.probe_call_count += r.step.probe_calls;
    ep.observer_call_count += r.step.observer_calls;
    const bool committed = r.step.answer.has_value();
    ep.steps.push_back(std::move(r.step));
    if (committed) {
      ep.final_answer = ep.steps.back().answer;
      break;
    }
  }
  ep.success = ep.final_answer.has_value() && *ep.final_answer == scene.target_class;
  ep.failure_category = ep.success ? FailureCategory::none : classify_failure(ep, scene);
  return ep;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json design_json(const Design& d) { return {d.u, d.v, d.w, d.h}; }

inline nlohmann::ordered_json to_json(const StepRecord& st) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["turn"] = st.turn;
  auto& seeds = j["seeds"] = ordered_json::array();
  for (const auto& d : st.seeds) seeds.push_back(design_json(d));
  auto& pool = j["pool"] = ordered_json::array();
  for (const auto& c : st.pool) pool.push_back({{"d", design_json(c.design)}, {"score", c.score}});
  if (!st.mcmc.empty()) {
    auto& m = j["mcmc"] = ordered_json::array();
    for (const auto& s : st.mcmc) {
      m.push_back({{"d", design_json(s.design)},
                   {"score", s.score},
                   {"alpha", s.alpha},
                   {"accepted", s.accepted},
                   {"escaped", s.escaped}});
    }
  }
  if (!st.lookahead.empty()) {
    auto& t = j["lookahead"] = ordered_json::array();
    for (const auto& br : st.lookahead) {
      ordered_json b;
      b["root"] = design_json(br.root);
      b["root_score"] = br.root_score;
      b["simulated"] = br.simulated.symbol;
      b["valid"] = br.valid;
      if (br.valid) b["next"] = design_json(br.next);
      auto& leaves = b["leaves"] = ordered_json::array();
      for (const auto& l : br.leaves) leaves.push_back({{"d", design_json(l.design)}, {"score", l.score}});
      b["value"] = br.value;
      t.push_back(std::move(b));
    }
  }
  j["selected"] = design_json(st.selected);
  j["score"] = st.selected_score;
  j["observation"] = st.observation.symbol;
  j["answer"] = st.answer ? ordered_json(*st.answer) : ordered_json(nullptr);
  j["probe_calls"] = st.probe_calls;
  j["observer_calls"] = st.observer_calls;
  return j;
}

inline nlohmann::ordered_json to_json(const EpisodeRecord& ep, bool with_trace = true) {
  nlohmann::ordered_json j;
  j["scene_seed"] = ep.scene_seed;
  j["episode_seed"] = ep.episode_seed;
  j["strategy"] = std::string(to_string(ep.strategy));
  j["seed_mode"] = std::string(to_string(ep.seed_mode));
  j["steps"] = ep.steps.size();
  j["probe_calls"] = ep.probe_call_count;
  j["observer_calls"] = ep.observer_call_count;
  j["final_answer"] = ep.final_answer ? nlohmann::ordered_json(*ep.final_answer)
                                      : nlohmann::ordered_json(nullptr);
  j["success"] = ep.success;
  j["failure_category"] = std::string(to_string(ep.failure_category));
  if (with_trace) {
    auto& t = j["trace"] = nlohmann::ordered_json::array();
    for (const auto& st : ep.steps) t.push_back(to_json(st));
  }
  return j;
}

}  // namespace fovea
