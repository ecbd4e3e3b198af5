#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "fastbasin/raster.hpp"

namespace fastbasin::detail {

// Overlap below this fraction of a cell counts as edge contact.
inline constexpr double kCoverTol = 1e-9;

// First and last index of unit cells whose open interval meets (lo, hi), for
// coordinates already in cell units; empty when first > last.
inline std::pair<int, int> span_cells(double lo, double hi, int n) {
  const double a = std::clamp(lo, -2.0, n + 2.0);
  const double b = std::clamp(hi, -2.0, n + 2.0);
  const int first = std::max(0, static_cast<int>(std::floor(a + kCoverTol)));
  const int last = std::min(n - 1, static_cast<int>(std::ceil(b - kCoverTol)) - 1);
  return {first, last};
}

// Calls fn(j, i0, i1) for each grid row j whose cells i0..i1 meet the interior
// of the convex polygon. Stops early when fn returns false; returns whether it
// ran to completion.
template <class Fn>
bool for_each_polygon_row(std::span<const Vec2> v, const Grid& g, Fn&& fn) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double h = g.h();
  double ylo = inf, yhi = -inf;
  for (const Vec2& p : v) {
    ylo = std::min(ylo, p.y);
    yhi = std::max(yhi, p.y);
  }
  const auto [j0, j1] = span_cells((ylo - g.window.ymin) / h, (yhi - g.window.ymin) / h, g.ny);
  const std::size_t n = v.size();
  for (int j = j0; j <= j1; ++j) {
    const double s0 = g.window.ymin + j * h;
    const double s1 = s0 + h;
    double xl = inf, xr = -inf;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& p = v[k];
      const Vec2& q = v[(k + 1) % n];
      if (p.y >= s0 && p.y <= s1) {
        xl = std::min(xl, p.x);
        xr = std::max(xr, p.x);
      }
      for (const double level : {s0, s1}) {
        if ((p.y - level) * (q.y - level) < 0.0) {
          const double x = p.x + (level - p.y) * (q.x - p.x) / (q.y - p.y);
          xl = std::min(xl, x);
          xr = std::max(xr, x);
        }
      }
    }
    if (!(xl <= xr)) continue;
    const auto [i0, i1] = span_cells((xl - g.window.xmin) / h, (xr - g.window.xmin) / h, g.nx);
    if (i0 > i1) continue;
    if (!fn(j, i0, i1)) return false;
  }
  return true;
}

}  // namespace fastbasin::detail
