#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fastbasin/ifs.hpp"
#include "fastbasin/maps.hpp"
#include "fastbasin/raster.hpp"

namespace fastbasin {

/// Cells of `dst` whose interior meets the image of the occupied cells of
/// `src`. The image of each closed cell is covered exactly (parallelogram,
/// interval or box), so the result is an outer approximation clipped to dst.
/// Affine2 and HalfSqrt need planar grids, Moebius1 needs a line grid.
CellRaster transport_raster(const MapSpec& map, Direction direction, const CellRaster& src, const Grid& dst);

/// As transport_raster, restricted to the listed source cell indices and
/// or-ed into `dst`.
void transport_cells(const MapSpec& map, Direction direction, const Grid& src_grid,
                     std::span<const std::size_t> cells, CellRaster& dst);

/// Raster of W(src) = union of w_i(src) on dst.
CellRaster hutchinson_image(const IfsSystem& ifs, const CellRaster& src, const Grid& dst);

/// Identity transport onto another grid.
CellRaster resample(const CellRaster& src, const Grid& dst);

/// Occupied cell indices in row-major order.
std::vector<std::size_t> occupied_cells(const CellRaster& raster);

/// Marks cells whose interior meets the convex polygon (vertices in order).
void cover_convex(std::span<const Vec2> vertices, CellRaster& dst);

/// Marks cells of a line grid whose interior meets [lo, hi]; infinite bounds allowed.
void cover_interval(double lo, double hi, CellRaster& dst);

/// The sub-grid of `grid` made of whole cells that meet `region`. Cell edges
/// coincide with those of `grid`, so resampling between the two is exact.
Grid aligned_subgrid(const Grid& grid, const Box& region);

}  // namespace fastbasin
