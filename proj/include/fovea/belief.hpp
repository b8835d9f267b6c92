#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/grid.hpp"
#include "fovea/scene.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

/// One executed step: the crop, its estimated utility, and what came back.
struct HistoryEntry {
  Design design;
  double score = std::numeric_limits<double>::quiet_NaN();
  Observation observation;
};

/// Factorised posterior p(l) * p(y) over a grid_size^2 spatial grid and the
/// label set, plus the interaction history. Treated as an immutable value.
struct BeliefState {
  int grid_size = 0;
  std::vector<double> spatial;
  std::vector<double> semantic;
  int step = 0;
  std::vector<HistoryEntry> history;

  Grid grid() const { return Grid(grid_size); }
  int y_cardinality() const { return static_cast<int>(semantic.size()); }
};

inline BeliefState init_belief(const Scene& scene) {
  BeliefState b;
  b.grid_size = scene.params.grid_size;
  b.spatial = scene.suggested_prior;
  b.semantic.assign(static_cast<std::size_t>(scene.params.y_cardinality),
                    1.0 / scene.params.y_cardinality);
  return b;
}

/// Posterior mass inside d: sum over cells of mass times fractional overlap.
inline double coverage(const std::vector<double>& spatial, const Grid& grid, const Design& d) {
  const Grid::AxisOverlap ov = grid.axis_overlap(d);
  double total = 0.0;
  for (int iy = ov.y_begin; iy < ov.y_end; ++iy) {
    const double fy = ov.ys[iy - ov.y_begin];
    if (fy <= 0.0) continue;
    double row = 0.0;
    for (int ix = ov.x_begin; ix < ov.x_end; ++ix) {
      row += spatial[grid.index(ix, iy)] * ov.xs[ix - ov.x_begin];
    }
    total += row * fy;
  }
  return std::clamp(total, 0.0, 1.0);
}

inline double coverage(const BeliefState& b, const Design& d) {
  return coverage(b.spatial, b.grid(), d);
}

/// Shannon entropy in bits, with 0 log 0 := 0.
inline double entropy_bits(const std::vector<double>& p) noexcept {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

struct Entropies {
  double spatial_bits = 0.0;
  double semantic_bits = 0.0;
};

inline Entropies entropies(const BeliefState& b) {
  return Entropies{entropy_bits(b.spatial), entropy_bits(b.semantic)};
}

/// Bayes update with the bifurcated spatial likelihood and the
/// coverage-weighted semantic likelihood. Throws DegenerateUpdateError when
/// the observation has zero probability under the belief.
inline BeliefState update(const BeliefState& b, const Design& d, Observation z,
                          const SensorConfig& cfg, double rho_req,
                          double score = std::numeric_limits<double>::quiet_NaN()) {
  const int ny = b.y_cardinality();
  if (z.symbol < 0 || z.symbol > noise_symbol(ny)) {
    throw ParameterError("observation", "symbol outside the observation alphabet");
  }
  const Grid grid = b.grid();
  const double phi = resolution_probability(d, cfg, rho_req);
  const double p0 = noise_pmf(z.symbol, ny);

  double expected_signal = 0.0;
  for (int y = 0; y < ny; ++y) {
    expected_signal += b.semantic[y] * signal_pmf(z.symbol, y, ny, cfg.confusion);
  }
  const double l_in = phi * expected_signal + (1.0 - phi) * p0;
  const double l_out = p0;

  BeliefState next;
  next.grid_size = b.grid_size;
  next.spatial.resize(b.spatial.size());
  for (std::size_t i = 0; i < b.spatial.size(); ++i) next.spatial[i] = b.spatial[i] * l_out;
  const Grid::AxisOverlap ov = grid.axis_overlap(d);
  for (int iy = ov.y_begin; iy < ov.y_end; ++iy) {
    for (int ix = ov.x_begin; ix < ov.x_end; ++ix) {
      const double f = ov.at(ix, iy);
      const std::size_t i = grid.index(ix, iy);
      next.spatial[i] = b.spatial[i] * (f * l_in + (1.0 - f) * l_out);
    }
  }

  const double cov = coverage(b, d);
  next.semantic.resize(b.semantic.size());
  for (int y = 0; y < ny; ++y) {
    const double lik = cov * (phi * signal_pmf(z.symbol, y, ny, cfg.confusion) + (1.0 - phi) * p0) +
                       (1.0 - cov) * p0;
    next.semantic[y] = b.semantic[y] * lik;
  }

  const double spatial_mass = normalize_in_place(next.spatial);
  const double semantic_mass = normalize_in_place(next.semantic);
  if (!(spatial_mass > 0.0) || !(semantic_mass > 0.0) || !std::isfinite(spatial_mass) ||
      !std::isfinite(semantic_mass)) {
    throw DegenerateUpdateError("observation has zero likelihood under the current belief",
                                spatial_mass, semantic_mass, phi, z.symbol);
  }

  next.step = b.step + 1;
  next.history = b.history;
  next.history.push_back(HistoryEntry{d, score, z});
  return next;
}

struct CalibrationMetrics {
  double p_target = 0.0;
  double p_viewed = 0.0;
};

inline constexpr double kViewedOverlapThreshold = 0.15;

/// P_target: mass of the cell(s) containing the target. P_viewed: mass of the
/// cells whose overlap with d exceeds 15% of the cell area.
inline CalibrationMetrics calibration_metrics(const BeliefState& b, const Scene& scene,
                                              const Design& d) {
  const Grid grid = b.grid();
  CalibrationMetrics m;
  for (std::size_t c : grid.cells_containing(scene.target_location)) m.p_target += b.spatial[c];
  const Grid::AxisOverlap ov = grid.axis_overlap(d);
  for (int iy = ov.y_begin; iy < ov.y_end; ++iy) {
    for (int ix = ov.x_begin; ix < ov.x_end; ++ix) {
      if (ov.at(ix, iy) > kViewedOverlapThreshold) m.p_viewed += b.spatial[grid.index(ix, iy)];
    }
  }
  return m;
}

/// Summed-area table over the spatial grid giving O(1) coverage of any
/// rectangle. Agrees with coverage() up to rounding.
class CoverageTable {
 public:
  explicit CoverageTable(const BeliefState& b) : CoverageTable(b.spatial, b.grid_size) {}

  CoverageTable(const std::vector<double>& spatial, int grid_size)
      : n_(grid_size), cells_(spatial),
        sat_(static_cast<std::size_t>(n_ + 1) * (n_ + 1), 0.0) {
    for (int iy = 0; iy < n_; ++iy) {
      double row = 0.0;
      for (int ix = 0; ix < n_; ++ix) {
        row += spatial[static_cast<std::size_t>(iy) * n_ + ix];
        at(ix + 1, iy + 1) = at(ix + 1, iy) + row;
      }
    }
  }

  double coverage(const Design& d) const {
    const double c = cumulative(d.right(), d.bottom()) - cumulative(d.u, d.bottom()) -
                     cumulative(d.right(), d.v) + cumulative(d.u, d.v);
    return std::clamp(c, 0.0, 1.0);
  }

 private:
  double& at(int x, int y) { return sat_[static_cast<std::size_t>(y) * (n_ + 1) + x]; }
  double at(int x, int y) const { return sat_[static_cast<std::size_t>(y) * (n_ + 1) + x]; }

  // Mass of [0, x] x [0, y]; bilinear inside a cell.
  double cumulative(double x, double y) const {
    const double gx = std::clamp(x * n_, 0.0, static_cast<double>(n_));
    const double gy = std::clamp(y * n_, 0.0, static_cast<double>(n_));
    const int ix = std::min(static_cast<int>(gx), n_ - 1);
    const int iy = std::min(static_cast<int>(gy), n_ - 1);
    const double fx = gx - ix;
    const double fy = gy - iy;
    const double base = at(ix, iy);
    const double col = at(ix + 1, iy) - base;  // column ix, rows [0, iy)
    const double row = at(ix, iy + 1) - base;  // rows iy, columns [0, ix)
    const double cell = cells_[static_cast<std::size_t>(iy) * n_ + ix];
    return base + fx * col + fy * row + fx * fy * cell;
  }

  int n_;
  std::vector<double> cells_;
  std::vector<double> sat_;
};

inline nlohmann::ordered_json to_json(const BeliefState& b) {
  nlohmann::ordered_json j;
  j["grid_size"] = b.grid_size;
  j["step"] = b.step;
  j["spatial"] = b.spatial;
  j["semantic"] = b.semantic;
  return j;
}

}  // namespace fovea
