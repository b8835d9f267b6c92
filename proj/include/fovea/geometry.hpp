#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <string>

#include "fovea/error.hpp"

namespace fovea {

/// Point in normalized image coordinates, x to the right, y down.
struct Point {
  double x = 0.0;
  double y = 0.0;

  auto operator<=>(const Point&) const = default;
};

/// Rectangular foveation crop [u, v, w, h] in normalized image coordinates.
/// Ordering is lexicographic on (u, v, w, h).
struct Design {
  double u = 0.0;
  double v = 0.0;
  double w = 1.0;
  double h = 1.0;

  auto operator<=>(const Design&) const = default;

  double area() const noexcept { return w * h; }
  double right() const noexcept { return u + w; }
  double bottom() const noexcept { return v + h; }
  Point center() const noexcept { return {u + 0.5 * w, v + 0.5 * h}; }

  bool contains(Point p) const noexcept {
    return p.x >= u && p.x <= u + w && p.y >= v && p.y <= v + h;
  }
};

inline constexpr double kMinExtent = 1e-4;
inline constexpr double kBoundsSlack = 1e-12;

inline Design full_image() { return Design{0.0, 0.0, 1.0, 1.0}; }

inline bool is_valid(const Design& d) noexcept {
  return std::isfinite(d.u) && std::isfinite(d.v) && std::isfinite(d.w) && std::isfinite(d.h) &&
         d.u >= 0.0 && d.v >= 0.0 && d.w > 0.0 && d.h > 0.0 && d.u + d.w <= 1.0 + kBoundsSlack &&
         d.v + d.h <= 1.0 + kBoundsSlack;
}

inline void require_valid(const Design& d) {
  if (!is_valid(d)) {
    throw ParameterError("design", "crop must satisfy 0<=u,v; w,h>0; u+w<=1; v+h<=1");
  }
}

/// Area of the rectangle intersection (0 when disjoint).
inline double intersection_area(const Design& a, const Design& b) noexcept {
  const double ox = std::min(a.right(), b.right()) - std::max(a.u, b.u);
  const double oy = std::min(a.bottom(), b.bottom()) - std::max(a.v, b.v);
  return (ox > 0.0 && oy > 0.0) ? ox * oy : 0.0;
}

inline double iou(const Design& a, const Design& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Floors extents at kMinExtent, caps them at the bounds, then translates the
/// crop so it lies within `bounds`. Extent is preserved whenever it fits.
inline Design clamp_to(Design d, const Design& bounds = full_image()) noexcept {
  d.w = std::clamp(d.w, kMinExtent, bounds.w);
  d.h = std::clamp(d.h, kMinExtent, bounds.h);
  d.u = std::clamp(d.u, bounds.u, bounds.right() - d.w);
  d.v = std::clamp(d.v, bounds.v, bounds.bottom() - d.h);
  return d;
}

/// Crop of the given extents centred on `c`, clamped into the unit square.
inline Design centered_box(Point c, double w, double h) noexcept {
  return clamp_to(Design{c.x - 0.5 * w, c.y - 0.5 * h, w, h});
}

inline std::string to_string(const Design& d) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "[%.6g, %.6g, %.6g, %.6g]", d.u, d.v, d.w, d.h);
  return buf;
}

}  // namespace fovea
