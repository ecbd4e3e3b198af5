#include "fastbasin/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "fastbasin/error.hpp"
#include "fastbasin/parallel.hpp"
#include "cover.hpp"

namespace fastbasin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using detail::kCoverTol;

struct Target {
  const Grid& grid;
  std::uint8_t* bits;
};

void mark_row(const Target& t, int j, int i0, int i1) {
  std::uint8_t* row = t.bits + t.grid.index(0, j);
  std::fill(row + i0, row + i1 + 1, std::uint8_t{1});
}

void cover_polygon(std::span<const Vec2> v, const Target& t) {
  detail::for_each_polygon_row(v, t.grid, [&t](int j, int i0, int i1) {
    mark_row(t, j, i0, i1);
    return true;
  });
}

void cover_span(double lo, double hi, const Target& t) {
  if (lo > hi) return;
  const double h = t.grid.h();
  const auto [i0, i1] = detail::span_cells((lo - t.grid.window.xmin) / h, (hi - t.grid.window.xmin) / h, t.grid.nx);
  if (i0 <= i1) mark_row(t, 0, i0, i1);
}

void cover_box(const Box& b, const Target& t) {
  const std::array<Vec2, 4> corners{Vec2{b.xmin, b.ymin}, Vec2{b.xmax, b.ymin}, Vec2{b.xmax, b.ymax},
                                    Vec2{b.xmin, b.ymax}};
  cover_polygon(corners, t);
}

double eval(const Moebius1& m, double x) { return (m.p * x + m.q) / (m.r * x + m.s); }

// Image of the closed interval [a, b] under a Moebius map, split at the pole.
void cover_moebius(const Moebius1& m, double a, double b, const Target& t) {
  const bool increasing = m.det() > 0.0;
  if (m.r == 0.0) {
    const double fa = eval(m, a), fb = eval(m, b);
    cover_span(std::min(fa, fb), std::max(fa, fb), t);
    return;
  }
  const double pole = -m.s / m.r;
  if (pole < a || pole > b) {
    const double fa = eval(m, a), fb = eval(m, b);
    cover_span(std::min(fa, fb), std::max(fa, fb), t);
    return;
  }
  if (pole > a) {
    const double fa = eval(m, a);
    if (increasing) cover_span(fa, kInf, t);
    else cover_span(-kInf, fa, t);
  }
  if (pole < b) {
    const double fb = eval(m, b);
    if (increasing) cover_span(-kInf, fb, t);
    else cover_span(fb, kInf, t);
  }
}

using CellCover = std::function<void(const Box&, const Target&)>;

CellCover make_cover(const MapSpec& map, Direction direction, const Grid& src, const Grid& dst) {
  const bool line = src.is_line();
  if (line != dst.is_line()) throw Error(ErrorKind::InvalidArgument, "transport between line and planar grids");
  if (const auto* a = std::get_if<Affine2>(&map)) {
    if (line) throw Error(ErrorKind::Unsupported, "affine2 maps need a planar grid");
    const Affine2 m = direction == Direction::Forward ? *a : inverse(*a);
    return [m](const Box& c, const Target& t) {
      const auto f = [&m](double x, double y) { return Vec2{m.a * x + m.b * y + m.tx, m.c * x + m.d * y + m.ty}; };
      const std::array<Vec2, 4> v{f(c.xmin, c.ymin), f(c.xmax, c.ymin), f(c.xmax, c.ymax), f(c.xmin, c.ymax)};
      cover_polygon(v, t);
    };
  }
  if (const auto* mb = std::get_if<Moebius1>(&map)) {
    if (!line) throw Error(ErrorKind::Unsupported, "moebius1 maps need a line grid");
    const Moebius1 m = direction == Direction::Forward ? *mb : inverse(*mb);
    return [m](const Box& c, const Target& t) { cover_moebius(m, c.xmin, c.xmax, t); };
  }
  if (const auto* hs = std::get_if<HalfSqrt>(&map)) {
    if (line) throw Error(ErrorKind::Unsupported, "halfsqrt maps need a planar grid");
    const double tx = hs->tx;
    if (direction == Direction::Forward) {
      // Only the part of the cell inside the strip has an image.
      return [tx](const Box& c, const Target& t) {
        const double h = t.grid.h();
        const Box d{std::max(c.xmin, 0.0), std::max(c.ymin, 0.5), std::min(c.xmax, 1.0), c.ymax};
        if (d.width() <= kCoverTol * h || d.height() <= kCoverTol * h) return;
        cover_box(Box{d.xmin / 2 + tx, std::sqrt(d.ymin), d.xmax / 2 + tx, std::sqrt(d.ymax)}, t);
      };
    }
    return [tx](const Box& c, const Target& t) {
      const double h = t.grid.h();
      const Box d{std::max(c.xmin, tx), std::max(c.ymin, std::sqrt(0.5)), std::min(c.xmax, tx + 0.5), c.ymax};
      if (d.width() <= kCoverTol * h || d.height() <= kCoverTol * h) {
        throw Error(ErrorKind::PartialMapsUnsupported, "cell lies outside the image of a halfsqrt map");
      }
      cover_box(Box{2 * (d.xmin - tx), d.ymin * d.ymin, 2 * (d.xmax - tx), d.ymax * d.ymax}, t);
    };
  }
  throw Error(ErrorKind::Unsupported, "complex-affine systems cannot be rasterized");
}

}  // namespace

std::vector<std::size_t> occupied_cells(const CellRaster& raster) {
  std::vector<std::size_t> cells;
  const auto& bits = raster.bits();
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k]) cells.push_back(k);
  }
  return cells;
}

void transport_cells(const MapSpec& map, Direction direction, const Grid& src_grid,
                     std::span<const std::size_t> cells, CellRaster& dst) {
  const CellCover cover = make_cover(map, direction, src_grid, dst.grid());
  const std::size_t workers = worker_count(cells.size());
  std::vector<std::vector<std::uint8_t>> scratch(workers > 1 ? workers - 1 : 0);
  const auto nx = static_cast<std::size_t>(src_grid.nx);
  parallel_for(cells.size(), [&](std::size_t begin, std::size_t end, std::size_t worker) {
    std::uint8_t* bits = dst.bits().data();
    if (worker > 0) {
      scratch[worker - 1].assign(dst.grid().cell_count(), 0);
      bits = scratch[worker - 1].data();
    }
    const Target target{dst.grid(), bits};
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t c = cells[k];
      cover(src_grid.cell_box(static_cast<int>(c % nx), static_cast<int>(c / nx)), target);
    }
  });
  for (const auto& part : scratch) {
    for (std::size_t k = 0; k < part.size(); ++k) dst.bits()[k] |= part[k];
  }
}

CellRaster transport_raster(const MapSpec& map, Direction direction, const CellRaster& src, const Grid& dst) {
  CellRaster out(dst);
  const auto cells = occupied_cells(src);
  transport_cells(map, direction, src.grid(), cells, out);
  return out;
}

CellRaster hutchinson_image(const IfsSystem& ifs, const CellRaster& src, const Grid& dst) {
  CellRaster out(dst);
  const auto cells = occupied_cells(src);
  for (const MapSpec& m : ifs.maps) transport_cells(m, Direction::Forward, src.grid(), cells, out);
  return out;
}

CellRaster resample(const CellRaster& src, const Grid& dst) {
  const MapSpec identity = src.grid().is_line() ? MapSpec{Moebius1{}} : MapSpec{Affine2{}};
  return transport_raster(identity, Direction::Forward, src, dst);
}

void cover_convex(std::span<const Vec2> vertices, CellRaster& dst) {
  cover_polygon(vertices, Target{dst.grid(), dst.bits().data()});
}

void cover_interval(double lo, double hi, CellRaster& dst) {
  if (!dst.grid().is_line()) throw Error(ErrorKind::InvalidArgument, "cover_interval needs a line grid");
  cover_span(lo, hi, Target{dst.grid(), dst.bits().data()});
}

Grid aligned_subgrid(const Grid& grid, const Box& region) {
  const double h = grid.h();
  const Box& w = grid.window;
  const auto [i0, i1] = detail::span_cells((region.xmin - w.xmin) / h, (region.xmax - w.xmin) / h, grid.nx);
  if (i0 > i1) throw Error(ErrorKind::InvalidArgument, "region misses the grid");
  if (grid.is_line()) return Grid{Box{w.xmin + i0 * h, w.ymin, w.xmin + (i1 + 1) * h, w.ymax}, i1 - i0 + 1, 1};
  const auto [j0, j1] = detail::span_cells((region.ymin - w.ymin) / h, (region.ymax - w.ymin) / h, grid.ny);
  if (j0 > j1) throw Error(ErrorKind::InvalidArgument, "region misses the grid");
  return Grid{Box{w.xmin + i0 * h, w.ymin + j0 * h, w.xmin + (i1 + 1) * h, w.ymin + (j1 + 1) * h}, i1 - i0 + 1,
              j1 - j0 + 1};
}

}  // namespace fastbasin
