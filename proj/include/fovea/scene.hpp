#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/grid.hpp"
#include "fovea/rng.hpp"

namespace fovea {

enum class PriorKind { uniform, misleading, informative };

inline std::string_view to_string(PriorKind k) {
  switch (k) {
    case PriorKind::uniform: return "uniform";
    case PriorKind::misleading: return "misleading";
    case PriorKind::informative: return "informative";
  }
  return "?";
}

inline PriorKind parse_prior_kind(std::string_view s) {
  if (s == "uniform") return PriorKind::uniform;
  if (s == "misleading") return PriorKind::misleading;
  if (s == "informative") return PriorKind::informative;
  throw ParameterError("prior_kind", "unknown prior kind '" + std::string(s) + "'");
}

/// Shape of the "global view" prior. Masses are fractions of the total.
struct PriorShape {
  double distractor_mass = 0.8;     // misleading: mass spread over distractor blobs
  double distractor_spread = 0.03;  // blob std-dev, normalized units
  double hint_mass = 0.15;          // misleading: weak bump near the true target
  double hint_spread = 0.03;
  double hint_offset = 0.02;        // std-dev of the bump's displacement from the target
  double informative_mass = 0.6;    // informative: mass within 2 cells of the target
  double min_separation = 0.25;     // distractor-to-target distance floor

  friend bool operator==(const PriorShape&, const PriorShape&) = default;

  void validate() const {
    auto fraction = [](const char* name, double x) {
      if (!(x >= 0.0 && x <= 1.0)) throw ParameterError(name, "must lie in [0, 1]");
    };
    fraction("distractor_mass", distractor_mass);
    fraction("hint_mass", hint_mass);
    fraction("informative_mass", informative_mass);
    if (distractor_mass + hint_mass > 1.0) {
      throw ParameterError("hint_mass", "distractor_mass + hint_mass must not exceed 1");
    }
    if (distractor_mass < 0.7) {
      throw ParameterError("distractor_mass", "misleading priors need at least 0.7 on distractors");
    }
    if (informative_mass < 0.5) {
      throw ParameterError("informative_mass", "informative priors need at least 0.5 near target");
    }
    if (!(distractor_spread > 0.0)) throw ParameterError("distractor_spread", "must be > 0");
    if (!(hint_spread > 0.0)) throw ParameterError("hint_spread", "must be > 0");
    if (!(hint_offset >= 0.0)) throw ParameterError("hint_offset", "must be >= 0");
    if (!(min_separation >= 0.0 && min_separation < 1.0)) {
      throw ParameterError("min_separation", "must lie in [0, 1)");
    }
  }
};

struct SceneParams {
  int grid_size = 64;
  int y_cardinality = 4;
  /// Required perceptual density (tokens per unit area) for the target to resolve.
  double target_feature_scale = 102400.0;
  int distractor_count = 3;
  PriorKind prior_kind = PriorKind::misleading;
  std::uint64_t seed = 0;
  PriorShape shape{};

  friend bool operator==(const SceneParams&, const SceneParams&) = default;

  void validate() const {
    if (grid_size < 2) throw ParameterError("grid_size", "must be >= 2");
    if (y_cardinality < 2) throw ParameterError("y_cardinality", "must be >= 2");
    if (!(target_feature_scale > 0.0) || !std::isfinite(target_feature_scale)) {
      throw ParameterError("target_feature_scale", "must be finite and > 0");
    }
    if (distractor_count < 0) throw ParameterError("distractor_count", "must be >= 0");
    if (prior_kind == PriorKind::misleading && distractor_count == 0) {
      throw ParameterError("distractor_count", "misleading prior needs at least one distractor");
    }
    shape.validate();
  }
};

struct Scene {
  SceneParams params;
  Point target_location;
  int target_class = 0;
  std::vector<Point> distractor_locations;
  /// Cells carrying distractor-blob mass (sorted, unique).
  std::vector<std::size_t> distractor_cells;
  /// Row-major grid distribution standing in for the global-view belief.
  std::vector<double> suggested_prior;

  Grid grid() const { return Grid(params.grid_size); }
  std::size_t target_cell() const { return grid().cell_of(target_location); }
  double rho_req() const { return params.target_feature_scale; }

  friend bool operator==(const Scene&, const Scene&) = default;
};

namespace detail {

inline double sq_dist(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Gaussian bump over cell centres, restricted to cells within `radius`
/// (or the whole grid when radius <= 0); always includes the centre's cell.
/// Scaled to sum to `mass` and added into `cells`.
inline void add_bump(const Grid& grid, Point centre, double spread, double radius, double mass,
                     std::vector<double>& cells, std::vector<std::size_t>* support = nullptr) {
  if (mass <= 0.0) return;
  std::vector<double> w(grid.cells(), 0.0);
  const std::size_t home = grid.cell_of(centre);
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    const double d2 = sq_dist(grid.cell_center(i), centre);
    if (radius > 0.0 && d2 > radius * radius && i != home) continue;
    w[i] = std::exp(-d2 / (2.0 * spread * spread));
  }
  if (w[home] <= 0.0) w[home] = 1.0;
  const double total = stable_sum(w);
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (w[i] <= 0.0) continue;
    cells[i] += mass * w[i] / total;
    if (support) support->push_back(i);
  }
}

inline std::vector<std::size_t> blob_support(const Grid& grid, Point centre, double radius) {
  std::vector<std::size_t> out;
  const std::size_t home = grid.cell_of(centre);
  for (std::size_t i = 0; i < grid.cells(); ++i) {
    if (i == home || sq_dist(grid.cell_center(i), centre) <= radius * radius) out.push_back(i);
  }
  return out;
}

}  // namespace detail

/// Builds a reproducible synthetic world. Target location is uniform over the
/// unit square; class is uniform over the label set.
inline Scene generate_scene(const SceneParams& params) {
  params.validate();
  const Grid grid(params.grid_size);
  const PriorShape& shape = params.shape;
  Rng rng(derive_seed(params.seed, 0x5ce7e));

  Scene scene;
  scene.params = params;
  scene.target_location = Point{rng.uniform(), rng.uniform()};
  scene.target_class = static_cast<int>(rng.index(static_cast<std::size_t>(params.y_cardinality)));
  const std::size_t target_cell = grid.cell_of(scene.target_location);

  // Distractors: rejection-sample until separated from the target and each
  // other, and their blobs leave the target's cell alone.
  const double radius = 2.5 * shape.distractor_spread;
  const int max_attempts = 10000;
  for (int k = 0; k < params.distractor_count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      const Point p{rng.uniform(), rng.uniform()};
      if (detail::sq_dist(p, scene.target_location) < shape.min_separation * shape.min_separation) {
        continue;
      }
      const auto support = detail::blob_support(grid, p, radius);
      if (std::find(support.begin(), support.end(), target_cell) != support.end()) continue;
      bool clash = false;
      for (const Point& q : scene.distractor_locations) {
        if (grid.cell_of(q) == grid.cell_of(p)) clash = true;
      }
      if (clash) continue;
      scene.distractor_locations.push_back(p);
      placed = true;
    }
    if (!placed) {
      throw ParameterError("distractor_count", "cannot place distractors away from the target");
    }
  }

  std::vector<double> prior(grid.cells(), 0.0);
  switch (params.prior_kind) {
    case PriorKind::uniform:
      std::fill(prior.begin(), prior.end(), 1.0 / static_cast<double>(grid.cells()));
      break;
    case PriorKind::informative: {
      // Gaussian over the Chebyshev-2 neighbourhood of the target cell.
      std::vector<double> w(grid.cells(), 0.0);
      const int tx = grid.column(target_cell);
      const int ty = grid.row(target_cell);
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int x = tx + dx;
          const int y = ty + dy;
          if (x < 0 || y < 0 || x >= grid.size() || y >= grid.size()) continue;
          w[grid.index(x, y)] = std::exp(-0.5 * (dx * dx + dy * dy));
        }
      }
      const double total = stable_sum(w);
      const double floor = (1.0 - shape.informative_mass) / static_cast<double>(grid.cells());
      for (std::size_t i = 0; i < grid.cells(); ++i) {
        prior[i] = floor + shape.informative_mass * w[i] / total;
      }
      break;
    }
    case PriorKind::misleading: {
      const double per_blob = shape.distractor_mass / params.distractor_count;
      for (const Point& p : scene.distractor_locations) {
        detail::add_bump(grid, p, shape.distractor_spread, radius, per_blob, prior,
                         &scene.distractor_cells);
      }
      std::vector<double> hint(grid.cells(), 0.0);
      const Point hint_centre{
          std::clamp(scene.target_location.x + rng.normal(0.0, shape.hint_offset), 0.0, 1.0),
          std::clamp(scene.target_location.y + rng.normal(0.0, shape.hint_offset), 0.0, 1.0)};
      detail::add_bump(grid, hint_centre, shape.hint_spread, 0.0, 1.0, hint);
      const double floor = (1.0 - shape.distractor_mass - shape.hint_mass) /
                           static_cast<double>(grid.cells());
      // Halve the hint until the target cell sits below the heaviest distractor cell.
      double hint_mass = shape.hint_mass;
      std::vector<double> blended(grid.cells());
      for (int tries = 0;; ++tries) {
        for (std::size_t i = 0; i < grid.cells(); ++i) {
          blended[i] = prior[i] + floor + hint_mass * hint[i] +
                       (shape.hint_mass - hint_mass) / static_cast<double>(grid.cells());
        }
        double max_distractor = 0.0;
        for (std::size_t c : scene.distractor_cells) {
          max_distractor = std::max(max_distractor, blended[c]);
        }
        if (blended[target_cell] < max_distractor || tries > 60) break;
        hint_mass *= 0.5;
      }
      prior = std::move(blended);
      std::sort(scene.distractor_cells.begin(), scene.distractor_cells.end());
      scene.distractor_cells.erase(
          std::unique(scene.distractor_cells.begin(), scene.distractor_cells.end()),
          scene.distractor_cells.end());
      break;
    }
  }
  if (params.prior_kind != PriorKind::misleading) {
    for (const Point& p : scene.distractor_locations) {
      scene.distractor_cells.push_back(grid.cell_of(p));
    }
    std::sort(scene.distractor_cells.begin(), scene.distractor_cells.end());
    scene.distractor_cells.erase(
        std::unique(scene.distractor_cells.begin(), scene.distractor_cells.end()),
        scene.distractor_cells.end());
  }
  normalize_in_place(prior);
  scene.suggested_prior = std::move(prior);
  return scene;
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteParams {
  int count = 200;
  int grid_size = 64;
  int y_cardinality = 4;
  double misleading_fraction = 1.0;
  double uniform_fraction = 0.0;  // remainder is informative
  /// Feature scale drawn log-uniformly from [min, max].
  double feature_scale_min = 25600.0;
  double feature_scale_max = 102400.0;
  int distractor_min = 2;
  int distractor_max = 4;
  PriorShape shape{};

  void validate() const {
    if (count < 1) throw EmptySuiteError();
    if (!(misleading_fraction >= 0.0 && uniform_fraction >= 0.0 &&
          misleading_fraction + uniform_fraction <= 1.0 + 1e-12)) {
      throw ParameterError("misleading_fraction", "prior-kind fractions must sum to at most 1");
    }
    if (!(feature_scale_min > 0.0 && feature_scale_max >= feature_scale_min)) {
      throw ParameterError("feature_scale_min", "need 0 < min <= max");
    }
    if (distractor_min < 0 || distractor_max < distractor_min) {
      throw ParameterError("distractor_min", "need 0 <= min <= max");
    }
  }
};

struct SuiteComposition {
  int misleading = 0;
  int uniform = 0;
  int informative = 0;
  double feature_scale_min = 0.0;
  double feature_scale_max = 0.0;
  double feature_scale_mean = 0.0;
};

struct SceneSuite {
  SuiteParams params;
  std::uint64_t base_seed = 0;
  std::vector<Scene> scenes;
  SuiteComposition composition;
};

/// N scenes with pairwise distinct derived seeds. Prior kinds are assigned by
/// deterministic quota (round(fraction * N)), in misleading/uniform/informative order.
inline SceneSuite scene_suite(const SuiteParams& params, std::uint64_t base_seed) {
  if (params.count < 1) throw EmptySuiteError();
  params.validate();
  SceneSuite suite;
  suite.params = params;
  suite.base_seed = base_seed;
  const int n = params.count;
  const int n_misleading = static_cast<int>(std::lround(params.misleading_fraction * n));
  const int n_uniform =
      std::min(n - n_misleading, static_cast<int>(std::lround(params.uniform_fraction * n)));
  Rng rng(derive_seed(base_seed, 0x5017e));
  double fs_sum = 0.0;
  suite.composition.feature_scale_min = INFINITY;
  suite.composition.feature_scale_max = 0.0;
  for (int i = 0; i < n; ++i) {
    SceneParams sp;
    sp.grid_size = params.grid_size;
    sp.y_cardinality = params.y_cardinality;
    sp.shape = params.shape;
    sp.seed = derive_seed(base_seed, static_cast<std::uint64_t>(i));
    const double lo = std::log(params.feature_scale_min);
    const double hi = std::log(params.feature_scale_max);
    sp.target_feature_scale = std::exp(rng.uniform(lo, hi));
    sp.distractor_count =
        params.distractor_min +
        static_cast<int>(rng.index(static_cast<std::size_t>(params.distractor_max - params.distractor_min + 1)));
    if (i < n_misleading) {
      sp.prior_kind = PriorKind::misleading;
      sp.distractor_count = std::max(1, sp.distractor_count);
      ++suite.composition.misleading;
    } else if (i < n_misleading + n_uniform) {
      sp.prior_kind = PriorKind::uniform;
      ++suite.composition.uniform;
    } else {
      sp.prior_kind = PriorKind::informative;
      ++suite.composition.informative;
    }
    suite.scenes.push_back(generate_scene(sp));
    fs_sum += sp.target_feature_scale;
    suite.composition.feature_scale_min = std::min(suite.composition.feature_scale_min, sp.target_feature_scale);
    suite.composition.feature_scale_max = std::max(suite.composition.feature_scale_max, sp.target_feature_scale);
  }
  suite.composition.feature_scale_mean = fs_sum / n;
  return suite;
}

// ---------------------------------------------------------------------------
// Line-delimited records

inline nlohmann::ordered_json to_json(const Scene& s) {
  nlohmann::ordered_json j;
  j["grid_size"] = s.params.grid_size;
  j["y_cardinality"] = s.params.y_cardinality;
  j["target_location"] = {s.target_location.x, s.target_location.y};
  j["target_class"] = s.target_class;
  j["prior_kind"] = std::string(to_string(s.params.prior_kind));
  j["seed"] = s.params.seed;
  j["target_feature_scale"] = s.params.target_feature_scale;
  j["distractor_count"] = s.params.distractor_count;
  auto& dl = j["distractor_locations"] = nlohmann::ordered_json::array();
  for (const Point& p : s.distractor_locations) dl.push_back({p.x, p.y});
  j["distractor_cells"] = s.distractor_cells;
  j["prior_cells"] = s.suggested_prior;
  return j;
}

/// Inverse of to_json. The prior shape is not part of the record; fields that
/// depend on it are restored verbatim.
inline Scene scene_from_json(const nlohmann::ordered_json& j) {
  try {
    Scene s;
    s.params.grid_size = j.at("grid_size").get<int>();
    s.params.y_cardinality = j.at("y_cardinality").get<int>();
    s.target_location = Point{j.at("target_location").at(0).get<double>(),
                              j.at("target_location").at(1).get<double>()};
    s.target_class = j.at("target_class").get<int>();
    s.params.prior_kind = parse_prior_kind(j.at("prior_kind").get<std::string>());
    s.params.seed = j.at("seed").get<std::uint64_t>();
    s.params.target_feature_scale = j.value("target_feature_scale", s.params.target_feature_scale);
    s.params.distractor_count = j.value("distractor_count", 0);
    if (j.contains("distractor_locations")) {
      for (const auto& p : j.at("distractor_locations")) {
        s.distractor_locations.push_back(Point{p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
    if (j.contains("distractor_cells")) {
      s.distractor_cells = j.at("distractor_cells").get<std::vector<std::size_t>>();
    }
    s.suggested_prior = j.at("prior_cells").get<std::vector<double>>();
    if (s.suggested_prior.size() != Grid(s.params.grid_size).cells()) {
      throw ParameterError("prior_cells", "length must equal grid_size^2");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("scene_record", e.what());
  }
}

inline void write_scenes(std::ostream& out, const std::vector<Scene>& scenes) {
  for (const Scene& s : scenes) out << to_json(s).dump() << '\n';
}

inline std::vector<Scene> read_scenes(std::istream& in) {
  std::vector<Scene> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(scene_from_json(nlohmann::ordered_json::parse(line)));
  }
  return out;
}

}  // namespace fovea
