#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fastbasin/geometry.hpp"

namespace fastbasin {

/// Square cells of side h over a window. Line rasters (ExtendedLine data) use
/// ny = 1 with the single row spanning y in [-h/2, h/2].
struct Grid {
  Box window;
  int nx = 0;
  int ny = 0;

  /// Square cells; ny follows from the window aspect ratio.
  static Grid square(const Box& window, int nx);
  static Grid line(double xmin, double xmax, int nx);

  double h() const { return (window.xmax - window.xmin) / nx; }
  bool is_line() const { return ny == 1; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  Box cell_box(int i, int j) const;
  Vec2 cell_center(int i, int j) const;
  /// Cell containing (x, y) (closed on the low side), if inside the window.
  std::optional<std::pair<int, int>> locate(double x, double y) const;

  /// Throws InvalidArgument unless the cells are square within 1e-12.
  void validate() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Finite outer approximation of a compact set: occupied cells are closed.
class CellRaster {
 public:
  CellRaster() = default;
  explicit CellRaster(const Grid& grid);

  const Grid& grid() const { return grid_; }
  double h() const { return grid_.h(); }
  int nx() const { return grid_.nx; }
  int ny() const { return grid_.ny; }

  bool test(int i, int j) const { return bits_[grid_.index(i, j)] != 0; }
  bool test(std::size_t k) const { return bits_[k] != 0; }
  void set(int i, int j, bool value = true) { bits_[grid_.index(i, j)] = value ? 1 : 0; }
  void set(std::size_t k, bool value = true) { bits_[k] = value ? 1 : 0; }
  void fill(bool value);

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  std::vector<std::uint8_t>& bits() { return bits_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  CellRaster& operator|=(const CellRaster& other);
  CellRaster& operator&=(const CellRaster& other);
  /// Cellwise inclusion; geometries must match.
  bool subset_of(const CellRaster& other) const;

  /// Bounding box of the occupied cells.
  std::optional<Box> occupied_bounds() const;

  friend bool operator==(const CellRaster&, const CellRaster&) = default;

 private:
  Grid grid_;
  std::vector<std::uint8_t> bits_;
};

/// Cells within `cells` Chebyshev steps of an occupied cell.
CellRaster dilate(const CellRaster& raster, int cells);

/// Cells whose closed box lies at distance < r from an occupied cell's box.
CellRaster dilate_by_radius(const CellRaster& raster, double r);

/// Hausdorff distance between the sets of occupied cell centres. Both
/// rasters must share a grid; +inf when exactly one is empty.
double hausdorff_distance(const CellRaster& a, const CellRaster& b);

/// Per-cell distance (in cell units) from each cell centre to the nearest
/// occupied cell centre; exact Euclidean distance transform.
std::vector<double> distance_transform(const CellRaster& raster);

/// Exact distance from arbitrary points to the union of occupied (closed)
/// cells, with a bucket grid for speed.
class RasterDistance {
 public:
  explicit RasterDistance(const CellRaster& raster);

  double operator()(double x, double y) const;
  bool empty() const { return cells_.empty(); }
  const Box& bounds() const { return bounds_; }

 private:
  struct Bucket {
    std::vector<std::uint32_t> cells;
  };
  Grid grid_;
  std::vector<Box> cells_;
  Box bounds_;
  int bx_ = 1;
  int by_ = 1;
  double bucket_w_ = 1.0;
  double bucket_h_ = 1.0;
  std::vector<Bucket> buckets_;
};

/// "FBR1" binary exchange format.
void write_fbr1(const CellRaster& raster, const std::filesystem::path& path);
CellRaster read_fbr1(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_fbr1(const CellRaster& raster);
CellRaster decode_fbr1(const std::vector<std::uint8_t>& bytes);

}  // namespace fastbasin
