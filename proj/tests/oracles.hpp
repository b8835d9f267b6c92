#pragma once

// Reference computations written independently of the library code paths:
// brute-force point sampling for coverage, direct interval arithmetic for
// overlaps, and a separate enumeration of the observation channel.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct Box {
  double u, v, w, h;
};

/// 1 / (1 + (tau * rho_req * area / B)^k)
inline double phi(double area, double bandwidth, double tau, double rho_req, double k) {
  return 1.0 / (1.0 + std::pow(tau * rho_req * area / bandwidth, k));
}

/// Coverage by midpoint sampling of each cell on a sub x sub lattice.
inline double fine_grid_coverage(const std::vector<double>& spatial, int n, Box d, int sub = 100) {
  double total = 0.0;
  const double cell = 1.0 / n;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double m = spatial[static_cast<std::size_t>(iy) * n + ix];
      if (m == 0.0) continue;
      long inside = 0;
      for (int sy = 0; sy < sub; ++sy) {
        const double y = (iy + (sy + 0.5) / sub) * cell;
        if (y < d.v || y > d.v + d.h) continue;
        for (int sx = 0; sx < sub; ++sx) {
          const double x = (ix + (sx + 0.5) / sub) * cell;
          if (x >= d.u && x <= d.u + d.w) ++inside;
        }
      }
      total += m * static_cast<double>(inside) / (static_cast<double>(sub) * sub);
    }
  }
  return total;
}

inline double overlap_1d(double a0, double a1, double b0, double b1) {
  const double o = std::min(a1, b1) - std::max(a0, b0);
  return o > 0.0 ? o : 0.0;
}

/// Cells whose overlap with d exceeds `threshold` of the cell area.
inline std::vector<std::size_t> cells_over_threshold(int n, Box d, double threshold) {
  std::vector<std::size_t> out;
  const double cell = 1.0 / n;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double ox = overlap_1d(ix * cell, (ix + 1) * cell, d.u, d.u + d.w);
      const double oy = overlap_1d(iy * cell, (iy + 1) * cell, d.v, d.v + d.h);
      if (ox * oy > threshold * cell * cell) out.push_back(static_cast<std::size_t>(iy) * n + ix);
    }
  }
  return out;
}

inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

/// I(y; z) for the gated channel where the crop covers mass `cov` and resolves
/// with probability `phi`; confusion spreads evenly over the wrong classes.
/// Computed as H(z) - H(z | y) from the per-class output distributions.
inline double semantic_mi(const std::vector<double>& prior_y, double cov, double phi, double eta) {
  const std::size_t ny = prior_y.size();
  const std::size_t nz = ny + 1;
  std::vector<double> pz(nz, 0.0);
  double h_cond = 0.0;
  for (std::size_t y = 0; y < ny; ++y) {
    std::vector<double> row(nz, 0.0);
    const double resolved = cov * phi;
    for (std::size_t z = 0; z < ny; ++z) {
      row[z] = resolved * (z == y ? 1.0 - eta : eta / static_cast<double>(ny - 1));
    }
    row[ny] = 1.0 - resolved;
    h_cond += prior_y[y] * entropy_bits(row);
    for (std::size_t z = 0; z < nz; ++z) pz[z] += prior_y[y] * row[z];
  }
  return entropy_bits(pz) - h_cond;
}

}  // namespace oracle
