#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fovea/geometry.hpp"

namespace fovea {

/// Uniform square discretization of the unit square. Cell (ix, iy) covers
/// [ix/n, (ix+1)/n] x [iy/n, (iy+1)/n] and is stored row-major at iy*n + ix.
class Grid {
 public:
  explicit Grid(int size) : size_(size) {}

  int size() const noexcept { return size_; }
  std::size_t cells() const noexcept { return static_cast<std::size_t>(size_) * size_; }
  double cell_extent() const noexcept { return 1.0 / size_; }
  double cell_area() const noexcept { return 1.0 / (static_cast<double>(size_) * size_); }

  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * size_ + ix;
  }
  int column(std::size_t idx) const noexcept { return static_cast<int>(idx % size_); }
  int row(std::size_t idx) const noexcept { return static_cast<int>(idx / size_); }

  Design cell_rect(std::size_t idx) const noexcept {
    const double e = cell_extent();
    return Design{column(idx) * e, row(idx) * e, e, e};
  }

  Point cell_center(std::size_t idx) const noexcept {
    const double e = cell_extent();
    return Point{(column(idx) + 0.5) * e, (row(idx) + 0.5) * e};
  }

  /// Cell containing p; points on the far edge map to the last cell.
  std::size_t cell_of(Point p) const noexcept {
    const int ix = std::clamp(static_cast<int>(std::floor(p.x * size_)), 0, size_ - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(p.y * size_)), 0, size_ - 1);
    return index(ix, iy);
  }

  /// Every cell whose closed rectangle contains p (one to four cells).
  std::vector<std::size_t> cells_containing(Point p) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells(); ++i) {
      if (cell_rect(i).contains(p)) out.push_back(i);
    }
    return out;
  }

  /// Per-axis overlap fractions of d with each column / row of cells.
  /// overlap_fraction(cell(ix,iy), d) == xs[ix] * ys[iy].
  struct AxisOverlap {
    int x_begin = 0;
    int x_end = 0;
    int y_begin = 0;
    int y_end = 0;
    std::vector<double> xs;
    std::vector<double> ys;

    double at(int ix, int iy) const noexcept {
      if (ix < x_begin || ix >= x_end || iy < y_begin || iy >= y_end) return 0.0;
      return xs[ix - x_begin] * ys[iy - y_begin];
    }
  };

  AxisOverlap axis_overlap(const Design& d) const {
    AxisOverlap ov;
    fill_axis(d.u, d.right(), ov.x_begin, ov.x_end, ov.xs);
    fill_axis(d.v, d.bottom(), ov.y_begin, ov.y_end, ov.ys);
    return ov;
  }

  /// Fraction of the cell's area inside d.
  double overlap_fraction(std::size_t idx, const Design& d) const noexcept {
    return intersection_area(cell_rect(idx), d) / cell_area();
  }

 private:
  void fill_axis(double lo, double hi, int& begin, int& end, std::vector<double>& out) const {
    begin = std::clamp(static_cast<int>(std::floor(lo * size_)), 0, size_);
    end = std::clamp(static_cast<int>(std::ceil(hi * size_)), 0, size_);
    out.assign(static_cast<std::size_t>(std::max(0, end - begin)), 0.0);
    for (int i = begin; i < end; ++i) {
      const double c0 = static_cast<double>(i) / size_;
      const double c1 = static_cast<double>(i + 1) / size_;
      const double len = std::min(hi, c1) - std::max(lo, c0);
      out[i - begin] = len > 0.0 ? std::min(1.0, len * size_) : 0.0;
    }
  }

  int size_;
};

/// Neumaier-compensated sum.
inline double stable_sum(const std::vector<double>& xs) noexcept {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

/// Divides by the compensated sum. Returns the pre-normalization total.
inline double normalize_in_place(std::vector<double>& xs) noexcept {
  const double total = stable_sum(xs);
  if (total > 0.0 && std::isfinite(total)) {
    for (double& x : xs) x /= total;
  }
  return total;
}

}  // namespace fovea
