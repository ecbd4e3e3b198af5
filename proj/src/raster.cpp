#include "fastbasin/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "fastbasin/error.hpp"
#include "io_util.hpp"

namespace fastbasin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared distance transform of a sampled function (Felzenszwalb-Huttenlocher).
// Empty sites carry kFar instead of infinity so the envelope arithmetic stays finite.
constexpr double kFar = 1e20;

void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  const auto meet = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
  };
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q) - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Grid Grid::square(const Box& window, int nx) {
  if (nx <= 0) throw Error(ErrorKind::InvalidArgument, "grid needs nx > 0");
  if (!(window.xmax > window.xmin) || !(window.ymax > window.ymin)) {
    throw Error(ErrorKind::InvalidArgument, "grid window must have positive extent");
  }
  const double h = (window.xmax - window.xmin) / nx;
  const double rows = window.height() / h;
  int ny = static_cast<int>(std::ceil(rows - 1e-9));
  ny = std::max(ny, 1);
  Grid grid{window, nx, ny};
  if (std::abs(rows - ny) > 1e-9 * std::max(1.0, rows)) grid.window.ymax = window.ymin + ny * h;
  return grid;
}

Grid Grid::line(double xmin, double xmax, int nx) {
  if (nx <= 0 || !(xmax > xmin)) throw Error(ErrorKind::InvalidArgument, "line grid needs xmin < xmax, nx > 0");
  const double h = (xmax - xmin) / nx;
  return Grid{Box{xmin, -0.5 * h, xmax, 0.5 * h}, nx, 1};
}

Box Grid::cell_box(int i, int j) const {
  const double hh = h();
  return Box{window.xmin + i * hh, window.ymin + j * hh, window.xmin + (i + 1) * hh, window.ymin + (j + 1) * hh};
}

Vec2 Grid::cell_center(int i, int j) const {
  const double hh = h();
  return Vec2{window.xmin + (i + 0.5) * hh, window.ymin + (j + 0.5) * hh};
}

std::optional<std::pair<int, int>> Grid::locate(double x, double y) const {
  if (!window.contains(x, y)) return std::nullopt;
  const double hh = h();
  const int i = std::min(nx - 1, static_cast<int>(std::floor((x - window.xmin) / hh)));
  const int j = std::min(ny - 1, static_cast<int>(std::floor((y - window.ymin) / hh)));
  return std::make_pair(std::max(i, 0), std::max(j, 0));
}

void Grid::validate() const {
  if (nx <= 0 || ny <= 0) throw Error(ErrorKind::InvalidArgument, "grid needs positive cell counts");
  const double hx = (window.xmax - window.xmin) / nx;
  const double hy = (window.ymax - window.ymin) / ny;
  if (!(hx > 0.0) || std::abs(hx - hy) > 1e-12 * std::max(std::abs(hx), std::abs(hy))) {
    throw Error(ErrorKind::InvalidArgument, "grid cells must be square");
  }
}

CellRaster::CellRaster(const Grid& grid) : grid_(grid), bits_(grid.cell_count(), 0) {}

void CellRaster::fill(bool value) { std::fill(bits_.begin(), bits_.end(), value ? 1 : 0); }

std::size_t CellRaster::count() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
}

CellRaster& CellRaster::operator|=(const CellRaster& other) {
  if (!(grid_ == other.grid_)) throw Error(ErrorKind::InvalidArgument, "raster geometries differ");
  for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] |= other.bits_[k];
  return *this;
}

CellRaster& CellRaster::operator&=(const CellRaster& other) {
  if (!(grid_ == other.grid_)) throw Error(ErrorKind::InvalidArgument, "raster geometries differ");
  for (std::size_t k = 0; k < bits_.size(); ++k) bits_[k] &= other.bits_[k];
  return *this;
}

bool CellRaster::subset_of(const CellRaster& other) const {
  if (!(grid_ == other.grid_)) throw Error(ErrorKind::InvalidArgument, "raster geometries differ");
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k] && !other.bits_[k]) return false;
  }
  return true;
}

std::optional<Box> CellRaster::occupied_bounds() const {
  int i0 = grid_.nx, i1 = -1, j0 = grid_.ny, j1 = -1;
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      if (!test(i, j)) continue;
      i0 = std::min(i0, i);
      i1 = std::max(i1, i);
      j0 = std::min(j0, j);
      j1 = std::max(j1, j);
    }
  }
  if (i1 < 0) return std::nullopt;
  const Box lo = grid_.cell_box(i0, j0);
  const Box hi = grid_.cell_box(i1, j1);
  return Box{lo.xmin, lo.ymin, hi.xmax, hi.ymax};
}

CellRaster dilate(const CellRaster& raster, int cells) {
  if (cells <= 0) return raster;
  const Grid& g = raster.grid();
  // Separable Chebyshev dilation: a 1D pass along x, then along y.
  const auto pass = [cells](int n, auto&& occupied, auto&& mark) {
    int last = -cells - 1;
    for (int k = 0; k < n; ++k) {
      if (occupied(k)) last = k;
      if (k - last <= cells) mark(k);
    }
    last = n + cells;
    for (int k = n - 1; k >= 0; --k) {
      if (occupied(k)) last = k;
      if (last - k <= cells) mark(k);
    }
  };
  CellRaster rows(g);
  for (int j = 0; j < g.ny; ++j) {
    pass(g.nx, [&](int i) { return raster.test(i, j); }, [&](int i) { rows.set(i, j); });
  }
  CellRaster out(g);
  for (int i = 0; i < g.nx; ++i) {
    pass(g.ny, [&](int j) { return rows.test(i, j); }, [&](int j) { out.set(i, j); });
  }
  return out;
}

CellRaster dilate_by_radius(const CellRaster& raster, double r) {
  const Grid& g = raster.grid();
  CellRaster out = raster;
  if (!(r > 0.0)) return out;
  const double h = g.h();
  const int reach = static_cast<int>(std::ceil(r / h)) + 1;
  // Offsets whose box-to-box distance is < r.
  std::vector<std::pair<int, int>> stencil;
  for (int dj = -reach; dj <= reach; ++dj) {
    for (int di = -reach; di <= reach; ++di) {
      const double gx = std::max(0, std::abs(di) - 1);
      const double gy = std::max(0, std::abs(dj) - 1);
      if (h * std::hypot(gx, gy) < r) stencil.emplace_back(di, dj);
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!raster.test(i, j)) continue;
      for (const auto& [di, dj] : stencil) {
        const int ii = i + di;
        const int jj = j + dj;
        if (ii >= 0 && ii < g.nx && jj >= 0 && jj < g.ny) out.set(ii, jj);
      }
    }
  }
  return out;
}

std::vector<double> distance_transform(const CellRaster& raster) {
  const Grid& g = raster.grid();
  const int nx = g.nx;
  const int ny = g.ny;
  std::vector<double> grid(g.cell_count());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = raster.test(k) ? 0.0 : kFar;

  const int n = std::max(nx, ny);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) f[static_cast<std::size_t>(j)] = grid[g.index(i, j)];
    edt_1d(f.data(), d.data(), ny, v, z);
    for (int j = 0; j < ny; ++j) grid[g.index(i, j)] = d[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) f[static_cast<std::size_t>(i)] = grid[g.index(i, j)];
    edt_1d(f.data(), d.data(), nx, v, z);
    for (int i = 0; i < nx; ++i) grid[g.index(i, j)] = d[static_cast<std::size_t>(i)];
  }
  for (double& value : grid) value = value >= 0.5 * kFar ? kInf : std::sqrt(value);
  return grid;
}

double hausdorff_distance(const CellRaster& a, const CellRaster& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::InvalidArgument, "hausdorff_distance needs matching grids");
  const bool ea = a.empty();
  const bool eb = b.empty();
  if (ea && eb) return 0.0;
  if (ea || eb) return kInf;
  const auto da = distance_transform(a);
  const auto db = distance_transform(b);
  double worst = 0.0;
  for (std::size_t k = 0; k < da.size(); ++k) {
    if (a.test(k)) worst = std::max(worst, db[k]);
    if (b.test(k)) worst = std::max(worst, da[k]);
  }
  return worst * a.h();
}

RasterDistance::RasterDistance(const CellRaster& raster) : grid_(raster.grid()) {
  const Grid& g = grid_;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (raster.test(i, j)) cells_.push_back(g.cell_box(i, j));
    }
  }
  bounds_ = raster.occupied_bounds().value_or(g.window);
  const double side = std::sqrt(static_cast<double>(std::max<std::size_t>(cells_.size(), 1)));
  bx_ = std::clamp(static_cast<int>(side / 2.0), 1, 64);
  by_ = g.is_line() ? 1 : bx_;
  bucket_w_ = bounds_.width() / bx_;
  bucket_h_ = std::max(bounds_.height() / by_, 1e-300);
  buckets_.resize(static_cast<std::size_t>(bx_) * static_cast<std::size_t>(by_));
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Box& cell = cells_[c];
    const double cx = 0.5 * (cell.xmin + cell.xmax);
    const double cy = 0.5 * (cell.ymin + cell.ymax);
    const int bi = std::clamp(static_cast<int>((cx - bounds_.xmin) / bucket_w_), 0, bx_ - 1);
    const int bj = std::clamp(static_cast<int>((cy - bounds_.ymin) / bucket_h_), 0, by_ - 1);
    buckets_[static_cast<std::size_t>(bj) * bx_ + bi].cells.push_back(static_cast<std::uint32_t>(c));
  }
}

double RasterDistance::operator()(double x, double y) const {
  if (cells_.empty()) return kInf;
  if (!std::isfinite(x) || !std::isfinite(y)) return kInf;
  const int bi = std::clamp(static_cast<int>(std::floor((x - bounds_.xmin) / bucket_w_)), 0, bx_ - 1);
  const int bj = std::clamp(static_cast<int>(std::floor((y - bounds_.ymin) / bucket_h_)), 0, by_ - 1);
  const double step = by_ == 1 ? bucket_w_ : std::min(bucket_w_, bucket_h_);
  // Every occupied cell spills at most half a cell beyond its bucket.
  const double spill = 0.5 * grid_.h();
  const double base = box_distance(bounds_, x, y);
  double best = kInf;
  const int max_ring = std::max(bx_, by_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    const double lower = std::max(base, (ring - 1) * step) - spill;
    if (ring > 0 && best <= lower) break;
    const int i0 = bi - ring, i1 = bi + ring, j0 = bj - ring, j1 = bj + ring;
    for (int jj = std::max(j0, 0); jj <= std::min(j1, by_ - 1); ++jj) {
      for (int ii = std::max(i0, 0); ii <= std::min(i1, bx_ - 1); ++ii) {
        if (ii != i0 && ii != i1 && jj != j0 && jj != j1) continue;
        for (const auto c : buckets_[static_cast<std::size_t>(jj) * bx_ + ii].cells) {
          best = std::min(best, box_distance(cells_[c], x, y));
        }
      }
    }
    if (best == 0.0) break;
  }
  return best;
}

std::vector<std::uint8_t> encode_fbr1(const CellRaster& raster) {
  const Grid& g = raster.grid();
  std::vector<std::uint8_t> out;
  detail::put_magic(out, "FBR1");
  detail::put_geometry(out, g);
  std::vector<std::uint8_t> packed((g.cell_count() + 7) / 8, 0);
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (raster.test(k)) packed[k / 8] |= static_cast<std::uint8_t>(0x80u >> (k % 8));
  }
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

CellRaster decode_fbr1(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  detail::expect_magic(bytes, pos, "FBR1");
  const Grid g = detail::get_geometry(bytes, pos);
  const std::size_t need = (g.cell_count() + 7) / 8;
  if (bytes.size() - pos != need) throw Error(ErrorKind::Io, "FBR1 payload has the wrong size");
  CellRaster raster(g);
  for (std::size_t k = 0; k < g.cell_count(); ++k) {
    if (bytes[pos + k / 8] & (0x80u >> (k % 8))) raster.set(k);
  }
  return raster;
}

void write_fbr1(const CellRaster& raster, const std::filesystem::path& path) {
  detail::write_file(path, encode_fbr1(raster));
}

CellRaster read_fbr1(const std::filesystem::path& path) {
  try {
    return decode_fbr1(detail::read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace fastbasin
