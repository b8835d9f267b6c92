#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <vector>

#include "fovea/belief.hpp"
#include "fovea/error.hpp"
#include "fovea/geometry.hpp"
#include "fovea/sensor.hpp"

namespace fovea {

/// Coverage-resolution utility of a design under a belief. The exact_* fields
/// are filled only by the enumeration routines.
struct UtilityReport {
  double coverage = 0.0;
  double phi = 0.0;
  double j_value = 0.0;           // coverage * phi
  double semantic_entropy = 0.0;  // H(y), bits
  double u_value = 0.0;           // H(y) * J, bits
  std::optional<double> exact_semantic_eig;
  std::optional<double> exact_full_eig;
};

inline UtilityReport coverage_resolution(const BeliefState& b, const Design& d,
                                         const SensorConfig& cfg, double rho_req) {
  UtilityReport r;
  r.coverage = coverage(b, d);
  r.phi = resolution_probability(d, cfg, rho_req);
  r.j_value = r.coverage * r.phi;
  r.semantic_entropy = entropy_bits(b.semantic);
  r.u_value = r.semantic_entropy * r.j_value;
  return r;
}

inline constexpr std::size_t kEnumerationBound = 1'000'000;

namespace detail {

/// Mutual information (bits) of a rows x cols joint table, row-major.
inline double mutual_information(const std::vector<double>& joint, std::size_t rows,
                                 std::size_t cols) {
  std::vector<double> pr(rows, 0.0);
  std::vector<double> pc(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      pr[r] += joint[r * cols + c];
      pc[c] += joint[r * cols + c];
    }
  }
  double mi = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = joint[r * cols + c];
      if (p > 0.0) mi += p * std::log2(p / (pr[r] * pc[c]));
    }
  }
  return mi;
}

inline void check_bound(std::size_t cells, int ny, std::size_t extra_factor = 1) {
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;
  const std::size_t size = cells * static_cast<std::size_t>(ny) * alphabet * extra_factor;
  if (size > kEnumerationBound) {
    throw SizeError("enumeration table of " + std::to_string(size) + " entries exceeds bound " +
                    std::to_string(kEnumerationBound));
  }
}

/// Per-cell overlap fractions of d.
inline std::vector<double> overlap_fractions(const Grid& grid, const Design& d) {
  std::vector<double> f(grid.cells(), 0.0);
  const Grid::AxisOverlap ov = grid.axis_overlap(d);
  for (int iy = ov.y_begin; iy < ov.y_end; ++iy) {
    for (int ix = ov.x_begin; ix < ov.x_end; ++ix) f[grid.index(ix, iy)] = ov.at(ix, iy);
  }
  return f;
}

/// Full joint p(cell, y, z), indexed ((cell * ny) + y) * alphabet + z.
inline std::vector<double> joint_table(const BeliefState& b, const Design& d,
                                       const SensorConfig& cfg, double rho_req) {
  const Grid grid = b.grid();
  const int ny = b.y_cardinality();
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;
  const double phi = resolution_probability(d, cfg, rho_req);
  const std::vector<double> frac = overlap_fractions(grid, d);
  std::vector<double> joint(grid.cells() * ny * alphabet, 0.0);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    for (int y = 0; y < ny; ++y) {
      const double prior = b.spatial[c] * b.semantic[y];
      for (std::size_t z = 0; z < alphabet; ++z) {
        const int zi = static_cast<int>(z);
        const double lik =
            frac[c] * mixture_likelihood(zi, y, true, phi, ny, cfg.confusion) +
            (1.0 - frac[c]) * mixture_likelihood(zi, y, false, phi, ny, cfg.confusion);
        joint[(c * ny + y) * alphabet + z] = prior * lik;
      }
    }
  }
  return joint;
}

}  // namespace detail

/// I(y; z | d) in bits by exact enumeration over (cell, y, z).
inline double exact_semantic_eig(const BeliefState& b, const Design& d, const SensorConfig& cfg,
                                 double rho_req) {
  const Grid grid = b.grid();
  const int ny = b.y_cardinality();
  detail::check_bound(grid.cells(), ny);
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;
  const std::vector<double> joint = detail::joint_table(b, d, cfg, rho_req);
  std::vector<double> yz(static_cast<std::size_t>(ny) * alphabet, 0.0);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    for (int y = 0; y < ny; ++y) {
      for (std::size_t z = 0; z < alphabet; ++z) {
        yz[y * alphabet + z] += joint[(c * ny + y) * alphabet + z];
      }
    }
  }
  return detail::mutual_information(yz, static_cast<std::size_t>(ny), alphabet);
}

/// I(z; l, y | d) in bits by exact enumeration.
inline double exact_full_eig(const BeliefState& b, const Design& d, const SensorConfig& cfg,
                             double rho_req) {
  const Grid grid = b.grid();
  const int ny = b.y_cardinality();
  detail::check_bound(grid.cells(), ny);
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;
  const std::vector<double> joint = detail::joint_table(b, d, cfg, rho_req);
  return detail::mutual_information(joint, grid.cells() * ny, alphabet);
}

/// Localization and semantic terms of the full EIG, each enumerated on its own.
struct EigDecomposition {
  double localization = 0.0;             // I(z; l | d)
  double semantic_given_location = 0.0;  // I(z; y | l, d)
};

inline EigDecomposition eig_decomposition(const BeliefState& b, const Design& d,
                                          const SensorConfig& cfg, double rho_req) {
  const Grid grid = b.grid();
  const int ny = b.y_cardinality();
  detail::check_bound(grid.cells(), ny);
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;
  const double phi = resolution_probability(d, cfg, rho_req);
  const std::vector<double> frac = detail::overlap_fractions(grid, d);

  EigDecomposition out;
  // Localization: p(cell, z) with y marginalised inside the likelihood.
  std::vector<double> cz(grid.cells() * alphabet, 0.0);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    for (std::size_t z = 0; z < alphabet; ++z) {
      double lik = 0.0;
      for (int y = 0; y < ny; ++y) {
        lik += b.semantic[y] * (frac[c] * mixture_likelihood(static_cast<int>(z), y, true, phi, ny,
                                                             cfg.confusion) +
                                (1.0 - frac[c]) * noise_pmf(static_cast<int>(z), ny));
      }
      cz[c * alphabet + z] = b.spatial[c] * lik;
    }
  }
  out.localization = detail::mutual_information(cz, grid.cells(), alphabet);

  // Semantic gain given location: sum_c p(c) I(z; y | c).
  std::vector<double> yz(static_cast<std::size_t>(ny) * alphabet);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    if (b.spatial[c] <= 0.0) continue;
    for (int y = 0; y < ny; ++y) {
      for (std::size_t z = 0; z < alphabet; ++z) {
        const int zi = static_cast<int>(z);
        yz[y * alphabet + z] =
            b.semantic[y] * (frac[c] * mixture_likelihood(zi, y, true, phi, ny, cfg.confusion) +
                             (1.0 - frac[c]) * noise_pmf(zi, ny));
      }
    }
    out.semantic_given_location +=
        b.spatial[c] * detail::mutual_information(yz, static_cast<std::size_t>(ny), alphabet);
  }
  return out;
}

struct SuperAdditivity {
  double i_joint = 0.0;  // I(y; z_wide, z_zoom), sequential with intermediate update
  double i_wide = 0.0;   // I(y; z_wide)
  double i_zoom = 0.0;   // I(y; z_zoom) under the prior belief
  double gap = 0.0;      // i_joint - i_wide - i_zoom
};

/// Two-step semantic information. The joint p(y, z_wide, z_zoom) is built as
/// p(y, z_wide) * p(z_zoom | y, b'), where b' is the Bayes-updated belief after
/// z_wide; its mutual information with y is i_joint.
inline SuperAdditivity super_additivity_gap(const BeliefState& b, const Design& d_wide,
                                            const Design& d_zoom, const SensorConfig& cfg,
                                            double rho_req) {
  const Grid grid = b.grid();
  const int ny = b.y_cardinality();
  detail::check_bound(grid.cells(), ny, static_cast<std::size_t>(ny) + 1);
  const std::size_t alphabet = static_cast<std::size_t>(ny) + 1;

  SuperAdditivity out;
  out.i_wide = exact_semantic_eig(b, d_wide, cfg, rho_req);
  out.i_zoom = exact_semantic_eig(b, d_zoom, cfg, rho_req);

  // p(y, z1) from the wide design.
  const std::vector<double> j1 = detail::joint_table(b, d_wide, cfg, rho_req);
  std::vector<double> yz1(static_cast<std::size_t>(ny) * alphabet, 0.0);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    for (int y = 0; y < ny; ++y) {
      for (std::size_t z = 0; z < alphabet; ++z) yz1[y * alphabet + z] += j1[(c * ny + y) * alphabet + z];
    }
  }

  // Rows y, columns (z1, z2).
  std::vector<double> joint(static_cast<std::size_t>(ny) * alphabet * alphabet, 0.0);
  const double phi_zoom = resolution_probability(d_zoom, cfg, rho_req);
  for (std::size_t z1 = 0; z1 < alphabet; ++z1) {
    double pz1 = 0.0;
    for (int y = 0; y < ny; ++y) pz1 += yz1[y * alphabet + z1];
    if (pz1 <= 0.0) continue;
    const BeliefState after = update(b, d_wide, Observation{static_cast<int>(z1)}, cfg, rho_req);
    const double cov_zoom = coverage(after, d_zoom);
    for (int y = 0; y < ny; ++y) {
      for (std::size_t z2 = 0; z2 < alphabet; ++z2) {
        const int zi = static_cast<int>(z2);
        const double lik = cov_zoom * mixture_likelihood(zi, y, true, phi_zoom, ny, cfg.confusion) +
                           (1.0 - cov_zoom) * noise_pmf(zi, ny);
        joint[y * alphabet * alphabet + z1 * alphabet + z2] = yz1[y * alphabet + z1] * lik;
      }
    }
  }
  out.i_joint = detail::mutual_information(joint, static_cast<std::size_t>(ny), alphabet * alphabet);
  out.gap = out.i_joint - out.i_wide - out.i_zoom;
  return out;
}

/// Index of the maximiser with ties (within `tol`) broken by smallest area,
/// then lexicographic (u, v, w, h).
inline std::size_t argmax_with_tie_rule(const std::vector<Design>& designs,
                                        const std::vector<double>& scores, double tol = 1e-12) {
  if (designs.empty()) throw PoolError("cannot select from an empty pool");
  std::size_t best = 0;
  for (std::size_t i = 1; i < designs.size(); ++i) {
    if (scores[i] > scores[best] + tol) {
      best = i;
    } else if (std::abs(scores[i] - scores[best]) <= tol) {
      const double ai = designs[i].area();
      const double ab = designs[best].area();
      if (ai < ab || (ai == ab && designs[i] < designs[best])) best = i;
    }
  }
  return best;
}

template <typename Score>
  requires std::invocable<Score&, const Design&>
std::size_t argmax_with_tie_rule(const std::vector<Design>& designs, Score&& score,
                                 double tol = 1e-12) {
  std::vector<double> s(designs.size());
  for (std::size_t i = 0; i < designs.size(); ++i) s[i] = score(designs[i]);
  return argmax_with_tie_rule(designs, s, tol);
}

}  // namespace fovea
