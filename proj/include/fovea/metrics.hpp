#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fovea/error.hpp"
#include "fovea/rng.hpp"

namespace fovea {

inline constexpr int kBootstrapResamples = 1000;
inline constexpr std::uint64_t kBootstrapSeed = 0xb0075742ULL;

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  double half_width() const noexcept { return 0.5 * (hi - lo); }
};

/// Linear-interpolated quantile of sorted data, q in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[j] - sorted[i]);
}

/// Percentile bootstrap CI of the mean with a fixed resampling seed.
inline Interval bootstrap_mean_ci(const std::vector<double>& xs, double level = 0.95,
                                  int resamples = kBootstrapResamples,
                                  std::uint64_t seed = kBootstrapSeed) {
  Interval out;
  out.estimate = mean(xs);
  if (xs.size() < 2) {
    out.lo = out.hi = out.estimate;
    return out;
  }
  Rng rng(seed);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (double& s : stats) {
    double sum = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) sum += xs[rng.index(xs.size())];
    s = sum / static_cast<double>(xs.size());
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = 0.5 * (1.0 - level);
  out.lo = quantile_sorted(stats, alpha);
  out.hi = quantile_sorted(stats, 1.0 - alpha);
  return out;
}

/// Bootstrap CI of mean(b - a) over paired units.
inline Interval paired_bootstrap_ci(const std::vector<double>& a, const std::vector<double>& b,
                                    double level = 0.95, int resamples = kBootstrapResamples,
                                    std::uint64_t seed = kBootstrapSeed) {
  if (a.size() != b.size()) throw ParameterError("paired", "samples must have equal length");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
  return bootstrap_mean_ci(diff, level, resamples, seed);
}

/// Ranks starting at 1; ties share their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("pearson", "samples must have equal length");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation; 0 when either side is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace fovea
