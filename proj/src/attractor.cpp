#include "fastbasin/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastbasin/error.hpp"
#include "fastbasin/transport.hpp"

namespace fastbasin {

Grid grid_for(const IfsSystem& ifs, const Box& window, int nx) {
  switch (ifs.space) {
    case ModelSpace::ExtendedLine:
      return Grid::line(window.xmin, window.xmax, nx);
    case ModelSpace::ComplexPlane2:
      throw Error(ErrorKind::Unsupported, "complex-affine systems cannot be rasterized");
    default:
      return Grid::square(window, nx);
  }
}

AttractorApprox compute_attractor(const IfsSystem& ifs, const Grid& grid, int max_iters) {
  grid.validate();
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const double lip = forward_lipschitz(ifs.maps[i], grid.window);
    if (!(lip < 1.0)) {
      throw Error(ErrorKind::NotContractive,
                  "map " + std::to_string(i + 1) + " has Lipschitz constant " + std::to_string(lip) + " on the window");
    }
  }
  CellRaster current(grid);
  current.fill(true);
  for (int iter = 1; iter <= max_iters; ++iter) {
    CellRaster next = hutchinson_image(ifs, current, grid);
    if (next == current) {
      AttractorApprox out{std::move(current), ifs.name, 0.0, iter};
      out.self_consistency = hausdorff_distance(out.raster, hutchinson_image(ifs, out.raster, grid));
      if (out.raster.empty()) throw Error(ErrorKind::NotFound, "attractor misses the window");
      return out;
    }
    current = std::move(next);
  }
  throw Error(ErrorKind::DidNotStabilize, "attractor raster still changing after " + std::to_string(max_iters) + " sweeps");
}

AttractorApprox compute_attractor(const IfsSystem& ifs, const Box& window, int nx, int max_iters) {
  return compute_attractor(ifs, grid_for(ifs, window, nx), max_iters);
}

Box affine_attractor_box(const IfsSystem& ifs, double margin) {
  if (ifs.space != ModelSpace::Plane2 || !ifs.all_affine()) {
    throw Error(ErrorKind::Unsupported, "automatic attractor box needs a plane2 affine system");
  }
  // Invariant ball around the first fixed point, then shrink its bounding box
  // by iterating box hulls of the images.
  const Point p = fixed_point(ifs, 1);
  double radius = 0.0;
  for (const MapSpec& m : ifs.maps) {
    const auto& a = std::get<Affine2>(m);
    const double c = singular_values(a.a, a.b, a.c, a.d).max;
    if (!(c < 1.0)) throw Error(ErrorKind::NotContractive, "affine map is not a contraction");
    radius = std::max(radius, distance(fastbasin::apply(m, p), p) / (1.0 - c));
  }
  Box box{p.x() - radius, p.y() - radius, p.x() + radius, p.y() + radius};
  for (int iter = 0; iter < 500; ++iter) {
    Box hull{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const MapSpec& m : ifs.maps) {
      for (const double x : {box.xmin, box.xmax}) {
        for (const double y : {box.ymin, box.ymax}) {
          const Point q = fastbasin::apply(m, Point::plane(x, y));
          hull.xmin = std::min(hull.xmin, q.x());
          hull.xmax = std::max(hull.xmax, q.x());
          hull.ymin = std::min(hull.ymin, q.y());
          hull.ymax = std::max(hull.ymax, q.y());
        }
      }
    }
    hull = Box{std::max(hull.xmin, box.xmin), std::max(hull.ymin, box.ymin), std::min(hull.xmax, box.xmax),
               std::min(hull.ymax, box.ymax)};
    const bool settled = std::abs(hull.xmin - box.xmin) + std::abs(hull.xmax - box.xmax) +
                             std::abs(hull.ymin - box.ymin) + std::abs(hull.ymax - box.ymax) <
                         1e-13 * (1.0 + radius);
    box = hull;
    if (settled) break;
  }
  const double pad = margin * std::max({box.width(), box.height(), 1e-9});
  return Box{box.xmin - pad, box.ymin - pad, box.xmax + pad, box.ymax + pad};
}

Box attractor_window(const IfsSystem& ifs) {
  if (ifs.attractor_window) return *ifs.attractor_window;
  if (ifs.space == ModelSpace::Plane2 && ifs.all_affine()) return affine_attractor_box(ifs);
  if (ifs.window) return *ifs.window;
  throw Error(ErrorKind::InvalidArgument, "system '" + ifs.name + "' needs a window or attractor_window directive");
}

Box view_window(const IfsSystem& ifs) { return ifs.window ? *ifs.window : attractor_window(ifs); }

AttractorApprox attractor_on(const IfsSystem& ifs, const Grid& field, int max_iters) {
  const Grid sub = aligned_subgrid(field, attractor_window(ifs));
  AttractorApprox a = compute_attractor(ifs, sub, max_iters);
  if (sub == field) return a;
  a.raster = resample(a.raster, field);
  return a;
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
  return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

std::vector<Point> chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in, std::uint64_t seed) {
  Point x;
  if (const auto* hs = std::get_if<HalfSqrt>(&ifs.maps.front())) {
    x = Point::plane(2.0 * hs->tx, 1.0);
  } else {
    x = fixed_point(ifs, 1);
  }
  const std::uint64_t n = ifs.size();
  std::vector<Point> out;
  out.reserve(n_points);
  for (std::size_t k = 0; k < burn_in + n_points; ++k) {
    x = fastbasin::apply(ifs.maps[counter_hash(seed, k) % n], x);
    if (k >= burn_in) out.push_back(x);
  }
  return out;
}

Dyadic Dyadic::from_double(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorKind::InvalidArgument, "dyadic value must lie in [0, 1]");
  const double scaled = std::ldexp(value, 62);
  const auto num = static_cast<std::uint64_t>(scaled);
  if (static_cast<double>(num) != scaled) throw Error(ErrorKind::InvalidArgument, "value has more than 62 binary digits");
  return Dyadic{num, 62};
}

bool gasket_member(const Dyadic& x, const Dyadic& y) {
  // Bring both to the exponent e = max; the digits of each coordinate are the
  // e low bits of the numerator (terminating expansion) or of numerator - 1
  // followed by all ones (the other expansion, when the numerator is > 0).
  const int e = std::max(x.exp, y.exp);
  if (e > 62 || x.exp < 0 || y.exp < 0) throw Error(ErrorKind::InvalidArgument, "dyadic exponent out of range");
  const std::uint64_t X = x.num << (e - x.exp);
  const std::uint64_t Y = y.num << (e - y.exp);
  const std::uint64_t one = std::uint64_t{1} << e;
  if (X > one || Y > one) return false;
  // 1 = 0.111... has no terminating expansion below the binary point.
  const bool x_term = X < one;
  const bool y_term = Y < one;
  if (x_term && y_term && (X & Y) == 0) return true;
  if (x_term && Y > 0 && (X & (Y - 1)) == 0) return true;
  if (y_term && X > 0 && ((X - 1) & Y) == 0) return true;
  return false;
}

bool gasket_member(double x, double y) { return gasket_member(Dyadic::from_double(x), Dyadic::from_double(y)); }

}  // namespace fastbasin
