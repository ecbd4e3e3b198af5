#include "fastbasin/basin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "fastbasin/error.hpp"
#include "fastbasin/parallel.hpp"
#include "fastbasin/transport.hpp"
#include "cover.hpp"
#include "io_util.hpp"

namespace fastbasin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_cutoff(int K) {
  if (K < 0 || K > kMaxGeneration) {
    throw Error(ErrorKind::InvalidArgument, "cutoff K must lie in 0.." + std::to_string(kMaxGeneration));
  }
}

void require_invertible(const IfsSystem& ifs) {
  for (const MapSpec& m : ifs.maps) {
    if (std::holds_alternative<HalfSqrt>(m)) {
      throw Error(ErrorKind::PartialMapsUnsupported, "halfsqrt maps have no total inverse; use generation_forward");
    }
    if (std::holds_alternative<ComplexAffine2>(m)) {
      throw Error(ErrorKind::Unsupported, "complex-affine systems cannot be rasterized");
    }
  }
}

CellRaster on_field(const CellRaster& raster, const Grid& field) {
  return raster.grid() == field ? raster : resample(raster, field);
}

GenerationField inverse_sweep(const IfsSystem& ifs, const CellRaster& seed, int K, const std::vector<int>& indices) {
  check_cutoff(K);
  require_invertible(ifs);
  const Grid& grid = seed.grid();
  GenerationField field(grid, K, 0.0);
  CellRaster reached = seed;
  std::vector<std::size_t> frontier = occupied_cells(seed);
  for (const std::size_t c : frontier) field.gen[c] = 0;
  for (int k = 1; k <= K && !frontier.empty(); ++k) {
    CellRaster image(grid);
    for (const int i : indices) transport_cells(ifs.map(i), Direction::Inverse, grid, frontier, image);
    frontier.clear();
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      if (image.test(c) && !reached.test(c)) {
        reached.set(c);
        field.gen[c] = static_cast<std::uint8_t>(k);
        frontier.push_back(c);
      }
    }
  }
  return field;
}

// Refined pull-back for affine plane systems. Generation k is the union of
// w_u^-1(A) over inverse words u of length k. A is carried as the pieces
// w_v(B), B the bounding box of the attractor raster, and every composite
// w_u^-1 o w_v is subdivided until the image of B fits in a cell.
class Pullback {
 public:
  Pullback(const IfsSystem& ifs, const CellRaster& attractor, const std::vector<int>& indices)
      : ifs_(ifs), grid_(attractor.grid()), field_(grid_, 0, 0.0) {
    for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
      if (attractor.test(c)) field_.gen[c] = 0;
    }
    bounds_ = attractor.occupied_bounds().value_or(grid_.window);
    for (const MapSpec& m : ifs.maps) forward_.push_back(std::get<Affine2>(m));
    for (const int i : indices) inverse_.push_back(inverse(std::get<Affine2>(ifs.map(i))));
    escape_radius_ = escape_radius(indices);
  }

  GenerationField run(int K) {
    field_.K = K;
    if (!attractor_present()) return field_;
    std::vector<Affine2> words{Affine2{}};
    std::vector<std::uint8_t> hit(grid_.cell_count());
    for (int k = 1; k <= K && !words.empty(); ++k) {
      std::vector<Affine2> next;
      next.reserve(words.size() * inverse_.size());
      for (const Affine2& m : words) {
        for (const Affine2& inv : inverse_) {
          const Affine2 c = compose(inv, m);
          // Copies beyond the escape radius never return to the window.
          if (min_distance(c, centre_) <= escape_radius_) next.push_back(c);
        }
      }
      words = unique_maps(std::move(next));
      std::fill(hit.begin(), hit.end(), std::uint8_t{0});
      render(words, hit);
      for (std::size_t c = 0; c < hit.size(); ++c) {
        if (hit[c] && field_.gen[c] == GenerationField::kUnset) field_.gen[c] = static_cast<std::uint8_t>(k);
      }
    }
    return field_;
  }

  /// Cells met by w(A), rendered piecewise like a single generation, united
  /// with A (which w(A) contains when w is an inverse word).
  CellRaster image(const Affine2& w) const {
    std::vector<std::uint8_t> hit(grid_.cell_count());
    if (attractor_present()) render({w}, hit);
    CellRaster out(grid_);
    for (std::size_t c = 0; c < hit.size(); ++c) {
      if (hit[c] || field_.gen[c] == 0) out.set(c);
    }
    return out;
  }

 private:
  static constexpr int kMaxDepth = 60;
  static constexpr double kCheckArea = 256.0;

  bool attractor_present() const {
    return std::any_of(field_.gen.begin(), field_.gen.end(), [](std::uint8_t g) { return g == 0; });
  }

  std::array<Vec2, 4> corners(const Affine2& m) const {
    const auto f = [&m](double x, double y) { return Vec2{m.a * x + m.b * y + m.tx, m.c * x + m.d * y + m.ty}; };
    const Box& b = bounds_;
    return {f(b.xmin, b.ymin), f(b.xmax, b.ymin), f(b.xmax, b.ymax), f(b.xmin, b.ymax)};
  }

  double min_distance(const Affine2& m, Vec2 p) const {
    const auto v = corners(m);
    // Distance from p to the parallelogram: zero inside, else to the nearest edge.
    bool inside = true;
    double sign = 0.0;
    double best = kInf;
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec2 a = v[k], b = v[(k + 1) % 4];
      const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross != 0.0) {
        if (sign == 0.0) sign = cross;
        else if ((cross > 0.0) != (sign > 0.0)) inside = false;
      }
      const double dx = b.x - a.x, dy = b.y - a.y;
      const double len2 = dx * dx + dy * dy;
      const double t = len2 > 0.0 ? std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy));
    }
    return inside ? 0.0 : best;
  }

  // Radius around the window centre beyond which inverse orbits only move
  // outward: d(w_i^-1(y), c) >= Lt d(y, c) once d(y, c) >= rho / (L - Lt).
  double escape_radius(const std::vector<int>& indices) {
    const Box& w = grid_.window;
    centre_ = Vec2{0.5 * (w.xmin + w.xmax), 0.5 * (w.ymin + w.ymax)};
    const double reach = 0.5 * std::hypot(w.width(), w.height());
    double L = kInf;
    for (const int i : indices) L = std::min(L, inverse_expansivity(ifs_.map(i), w));
    if (!(L > 1.0)) return kInf;
    const double Lt = 0.5 * (1.0 + L);
    const Point c = Point::plane(centre_.x, centre_.y);
    double rho = 0.0;
    for (const int i : indices) rho = std::max(rho, distance(apply_inverse(ifs_.map(i), c), c));
    return std::max(reach, rho / (L - Lt));
  }

  static std::array<std::int64_t, 6> key(const Affine2& m) {
    const auto q = [](double v) { return static_cast<std::int64_t>(std::llround(std::clamp(v, -1e9, 1e9) * 1e9)); };
    return {q(m.a), q(m.b), q(m.c), q(m.d), q(m.tx), q(m.ty)};
  }

  static std::vector<Affine2> unique_maps(std::vector<Affine2> maps) {
    std::vector<std::pair<std::array<std::int64_t, 6>, std::size_t>> keyed;
    keyed.reserve(maps.size());
    for (std::size_t k = 0; k < maps.size(); ++k) keyed.emplace_back(key(maps[k]), k);
    std::sort(keyed.begin(), keyed.end());
    std::vector<Affine2> out;
    out.reserve(maps.size());
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k > 0 && keyed[k].first == keyed[k - 1].first) continue;
      out.push_back(maps[keyed[k].second]);
    }
    return out;
  }

  bool overlaps_window(const std::array<Vec2, 4>& v) const {
    const Box& w = grid_.window;
    const double tol = detail::kCoverTol * grid_.h();
    double xl = kInf, xr = -kInf, yl = kInf, yr = -kInf;
    for (const Vec2& p : v) {
      xl = std::min(xl, p.x);
      xr = std::max(xr, p.x);
      yl = std::min(yl, p.y);
      yr = std::max(yr, p.y);
    }
    return xr > w.xmin + tol && xl < w.xmax - tol && yr > w.ymin + tol && yl < w.ymax - tol;
  }

  // Breadth-first over pieces w_u^-1 o w_v, merging equal composites.
  void render(const std::vector<Affine2>& words, std::vector<std::uint8_t>& hit) const {
    const double h = grid_.h();
    std::vector<Affine2> level = words, next;
    for (int depth = 0; !level.empty(); ++depth) {
      next.clear();
      for (const Affine2& piece : level) {
        const auto v = corners(piece);
        if (!overlaps_window(v)) continue;
        double xl = kInf, xr = -kInf, yl = kInf, yr = -kInf;
        for (const Vec2& p : v) {
          xl = std::min(xl, p.x);
          xr = std::max(xr, p.x);
          yl = std::min(yl, p.y);
          yr = std::max(yr, p.y);
        }
        const double side = std::max(xr - xl, yr - yl);
        if (side <= h * (1.0 + 1e-9) || depth >= kMaxDepth) {
          detail::for_each_polygon_row(v, grid_, [&](int j, int i0, int i1) {
            std::fill(hit.begin() + static_cast<std::ptrdiff_t>(grid_.index(i0, j)),
                      hit.begin() + static_cast<std::ptrdiff_t>(grid_.index(i1, j)) + 1, std::uint8_t{1});
            return true;
          });
          continue;
        }
        // Nothing new can come from a piece whose cells are all decided.
        if ((xr - xl) * (yr - yl) <= kCheckArea * h * h) {
          const bool settled = detail::for_each_polygon_row(v, grid_, [&](int j, int i0, int i1) {
            for (int i = i0; i <= i1; ++i) {
              const std::size_t c = grid_.index(i, j);
              if (field_.gen[c] == GenerationField::kUnset && !hit[c]) return false;
            }
            return true;
          });
          if (settled) continue;
        }
        for (const Affine2& f : forward_) next.push_back(compose(piece, f));
      }
      level = unique_maps(std::move(next));
      next = {};
    }
  }

  const IfsSystem& ifs_;
  Grid grid_;
  GenerationField field_;
  Box bounds_;
  std::vector<Affine2> forward_;
  std::vector<Affine2> inverse_;
  Vec2 centre_;
  double escape_radius_ = kInf;
};

GenerationField refined_pullback(const IfsSystem& ifs, const CellRaster& attractor, int K,
                                 const std::vector<int>& indices) {
  check_cutoff(K);
  return Pullback(ifs, attractor, indices).run(K);
}


std::vector<int> all_indices(const IfsSystem& ifs) {
  std::vector<int> out(ifs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i) + 1;
  return out;
}

Point cell_point(const Grid& grid, int i, int j) {
  const Vec2 c = grid.cell_center(i, j);
  return grid.is_line() ? Point::line(c.x) : Point::plane(c.x, c.y);
}

}  // namespace

GenerationField::GenerationField(const Grid& g, int cutoff, double tolerance)
    : grid(g), gen(g.cell_count(), kUnset), K(cutoff), eps(tolerance) {}

CellRaster GenerationField::level_set(int k) const {
  CellRaster out(grid);
  for (std::size_t c = 0; c < gen.size(); ++c) {
    if (gen[c] != kUnset && gen[c] <= k) out.set(c);
  }
  return out;
}

std::size_t GenerationField::count(int k) const {
  return static_cast<std::size_t>(std::count(gen.begin(), gen.end(), static_cast<std::uint8_t>(k)));
}

std::vector<std::uint8_t> encode_fbg1(const GenerationField& field) {
  std::vector<std::uint8_t> out;
  detail::put_magic(out, "FBG1");
  detail::put_geometry(out, field.grid);
  out.insert(out.end(), field.gen.begin(), field.gen.end());
  return out;
}

GenerationField decode_fbg1(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  detail::expect_magic(bytes, pos, "FBG1");
  const Grid g = detail::get_geometry(bytes, pos);
  if (bytes.size() - pos != g.cell_count()) throw Error(ErrorKind::Io, "FBG1 payload has the wrong size");
  GenerationField field(g, 0, 0.0);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), field.gen.begin());
  for (const std::uint8_t v : field.gen) {
    if (v != GenerationField::kUnset) field.K = std::max(field.K, int{v});
  }
  return field;
}

void write_fbg1(const GenerationField& field, const std::filesystem::path& path) {
  detail::write_file(path, encode_fbg1(field));
}

GenerationField read_fbg1(const std::filesystem::path& path) {
  try {
    return decode_fbg1(detail::read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

GenerationField fast_basin_stepwise(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K) {
  return inverse_sweep(ifs, on_field(a.raster, field), K, all_indices(ifs));
}

GenerationField fast_basin_inverse(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K) {
  return fast_basin_restricted(ifs, a, field, K, all_indices(ifs));
}

GenerationField fast_basin_inverse(const IfsSystem& ifs, const AttractorApprox& a, const Box& window, int nx, int K) {
  return fast_basin_inverse(ifs, a, grid_for(ifs, window, nx), K);
}

Box fast_basin_extent(const IfsSystem& ifs, const Box& bounds, int K) {
  check_cutoff(K);
  if (ifs.space != ModelSpace::Plane2 || !ifs.all_affine()) {
    throw Error(ErrorKind::Unsupported, "fast_basin_extent needs a plane2 affine system");
  }
  std::vector<Affine2> inv;
  for (const MapSpec& m : ifs.maps) inv.push_back(inverse(std::get<Affine2>(m)));
  Box out = bounds;
  std::vector<Affine2> words{Affine2{}};
  for (int k = 1; k <= K; ++k) {
    std::vector<Affine2> next;
    for (const Affine2& w : words) {
      for (const Affine2& i : inv) {
        const Affine2 c = compose(i, w);
        for (const double x : {bounds.xmin, bounds.xmax}) {
          for (const double y : {bounds.ymin, bounds.ymax}) {
            const double px = c.a * x + c.b * y + c.tx, py = c.c * x + c.d * y + c.ty;
            out = Box{std::min(out.xmin, px), std::min(out.ymin, py), std::max(out.xmax, px), std::max(out.ymax, py)};
          }
        }
        next.push_back(c);
      }
    }
    words = std::move(next);
  }
  return out;
}

GenerationField fast_basin_restricted(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K,
                                      const std::vector<int>& indices) {
  for (const int i : indices) (void)ifs.map(i);
  if (ifs.space == ModelSpace::Plane2 && ifs.all_affine()) {
    return refined_pullback(ifs, on_field(a.raster, field), K, indices);
  }
  return inverse_sweep(ifs, on_field(a.raster, field), K, indices);
}

RasterOracle::RasterOracle(const CellRaster& raster) : dist_(raster) {
  if (const auto b = raster.occupied_bounds()) {
    center_ = Point::plane(0.5 * (b->xmin + b->xmax), 0.5 * (b->ymin + b->ymax));
    if (raster.grid().is_line()) center_ = Point::line(center_.x());
    radius_ = 0.5 * std::hypot(b->width(), raster.grid().is_line() ? 0.0 : b->height());
  }
}

double RasterOracle::distance(const Point& x) const {
  if (x.at_infinity) return kInf;
  return dist_(x.x(), x.y());
}

AffineAttractorOracle::AffineAttractorOracle(const IfsSystem& ifs, double tol) : tol_(tol) {
  if (ifs.space != ModelSpace::Plane2 || !ifs.all_affine()) {
    throw Error(ErrorKind::Unsupported, "AffineAttractorOracle needs a plane2 affine system");
  }
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "oracle tolerance must be positive");
  const Point p = fixed_point(ifs, 1);
  c_ = Vec2{p.x(), p.y()};
  for (const MapSpec& m : ifs.maps) {
    const auto& a = std::get<Affine2>(m);
    const double s = singular_values(a.a, a.b, a.c, a.d).max;
    if (!(s < 1.0)) throw Error(ErrorKind::NotContractive, "AffineAttractorOracle needs contractive maps");
    maps_.push_back(a);
    lip_.push_back(s);
    // d(w(x), c) <= s d(x, c) + d(w(c), c) keeps the disk of this radius invariant.
    radius_ = std::max(radius_, std::hypot(a.a * c_.x + a.b * c_.y + a.tx - c_.x, a.c * c_.x + a.d * c_.y + a.ty - c_.y) /
                                    (1.0 - s));
  }
}

double AffineAttractorOracle::search(const Point& x, double tol, double stop_below, double stop_above) const {
  struct Piece {
    double lb;
    Affine2 m;
    double lip;
    bool operator>(const Piece& o) const { return lb > o.lb; }
  };
  const auto gap = [&](const Affine2& m) {
    return std::hypot(m.a * c_.x + m.b * c_.y + m.tx - x.x(), m.c * c_.x + m.d * c_.y + m.ty - x.y());
  };
  std::priority_queue<Piece, std::vector<Piece>, std::greater<>> open;
  double ub = gap(Affine2{});
  open.push({std::max(0.0, ub - radius_), Affine2{}, 1.0});
  while (!open.empty()) {
    const Piece p = open.top();
    open.pop();
    if (ub <= stop_below || p.lb > stop_above || p.lb >= ub - tol) break;
    for (std::size_t i = 0; i < maps_.size(); ++i) {
      Piece child{0.0, compose(p.m, maps_[i]), p.lip * lip_[i]};
      const double d = gap(child.m);
      ub = std::min(ub, d);
      child.lb = std::max(0.0, d - child.lip * radius_);
      if (child.lb < ub - tol && child.lb <= stop_above) open.push(child);
    }
  }
  return ub;
}

double AffineAttractorOracle::distance(const Point& x) const { return search(x, tol_, -1.0, kInf); }

bool AffineAttractorOracle::contains(const Point& x, double eps) const {
  return search(x, 1e-12, eps, eps) <= eps + 1e-12;
}

double IntervalOracle::distance(const Point& x) const {
  if (x.at_infinity) return kInf;
  return std::max({lo_ - x.x(), x.x() - hi_, 0.0});
}

double SegmentOracle::distance(const Point& x) const {
  const double dx = b_.x - a_.x, dy = b_.y - a_.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((x.x() - a_.x) * dx + (x.y() - a_.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x.x() - (a_.x + t * dx), x.y() - (a_.y + t * dy));
}

Point SegmentOracle::center() const { return Point::plane(0.5 * (a_.x + b_.x), 0.5 * (a_.y + b_.y)); }

double SegmentOracle::radius() const { return 0.5 * std::hypot(b_.x - a_.x, b_.y - a_.y); }

double ParabolaOracle::distance(const Point& x) const {
  const std::complex<double> z = x.z();
  const std::complex<double> zc{std::clamp(z.real(), -s_, s_), std::clamp(z.imag(), -s_, s_)};
  return std::hypot(std::abs(z - zc), std::abs(x.w() - zc * zc));
}

double ParabolaOracle::radius() const { return std::sqrt(2.0 * s_ * s_ + 4.0 * s_ * s_ * s_ * s_); }

std::optional<int> generation_forward(const IfsSystem& ifs, const Point& x, const AttractorOracle& a, int K,
                                      double eps, ToleranceFrame frame) {
  check_cutoff(K);
  // |w_i(y) - c| >= l |y - c| - rho, with l the smallest co-Lipschitz
  // constant and rho = max |w_i(c) - c|, bounds every descendant from below.
  double ell = kInf;
  for (const MapSpec& m : ifs.maps) ell = std::min(ell, co_lipschitz(m));
  const Point c = a.center();
  const double reach = a.radius() + eps;
  double rho = 0.0;
  if (ell > 0.0) {
    for (const MapSpec& m : ifs.maps) rho = std::max(rho, fastbasin::distance(fastbasin::apply(m, c), c));
  }
  const auto hopeless = [&](const Point& y, int remaining) {
    if (!(ell > 0.0) || y.at_infinity) return false;
    double lb = fastbasin::distance(y, c);
    for (int m = 1; m <= remaining; ++m) {
      lb = ell * lb - rho;
      if (lb <= reach) return false;
    }
    return true;
  };

  std::vector<double> shrink(ifs.size(), 1.0);
  if (frame == ToleranceFrame::Field) {
    for (std::size_t i = 0; i < ifs.size(); ++i) shrink[i] = co_lipschitz(ifs.maps[i]);
  }

  int best = K + 1;
  const auto search = [&](auto&& self, const Point& y, int depth, double tol) -> void {
    if (a.contains(y, tol)) {
      best = depth;
      return;
    }
    if (depth + 1 >= best || hopeless(y, best - 1 - depth)) return;
    for (std::size_t i = 0; i < ifs.size(); ++i) {
      self(self, fastbasin::apply(ifs.maps[i], y), depth + 1, tol * shrink[i]);
      if (best <= depth + 1) return;
    }
  };
  search(search, x, 0, eps);
  if (best > K) return std::nullopt;
  return best;
}

GenerationField fast_basin_forward(const IfsSystem& ifs, const AttractorOracle& a, const Grid& field, int K,
                                   double eps, ToleranceFrame frame) {
  check_cutoff(K);
  GenerationField out(field, K, eps);
  parallel_for(field.cell_count(), [&](std::size_t begin, std::size_t end, std::size_t) {
    const auto nx = static_cast<std::size_t>(field.nx);
    for (std::size_t c = begin; c < end; ++c) {
      const Point x = cell_point(field, static_cast<int>(c % nx), static_cast<int>(c / nx));
      if (const auto g = generation_forward(ifs, x, a, K, eps, frame)) out.gen[c] = static_cast<std::uint8_t>(*g);
    }
  });
  return out;
}

ContinuationApprox continuation(const IfsSystem& ifs, const Word& prefix, const AttractorApprox& a, const Grid& field) {
  require_invertible(ifs);
  for (const int i : prefix.indices) (void)ifs.map(i);
  ContinuationApprox out{prefix, {}};
  const CellRaster attractor = on_field(a.raster, field);
  out.stages.push_back(attractor);
  if (ifs.space == ModelSpace::Plane2 && ifs.all_affine()) {
    const Pullback pullback(ifs, attractor, all_indices(ifs));
    Affine2 composed;
    for (const int index : prefix.indices) {
      composed = compose(composed, inverse(std::get<Affine2>(ifs.map(index))));
      out.stages.push_back(pullback.image(composed));
    }
    return out;
  }
  // w_{t1}^-1 o ... o w_{tk}^-1, built up by composing on the right.
  MapSpec composed = ifs.space == ModelSpace::ExtendedLine ? MapSpec{Moebius1{}} : MapSpec{Affine2{}};
  for (const int index : prefix.indices) {
    const MapSpec& m = ifs.map(index);
    composed = std::visit(
        [](const auto& outer, const auto& inner) -> MapSpec {
          using O = std::decay_t<decltype(outer)>;
          using I = std::decay_t<decltype(inner)>;
          if constexpr (std::is_same_v<O, I> && (std::is_same_v<O, Affine2> || std::is_same_v<O, Moebius1>)) {
            return compose(outer, inverse(inner));
          } else {
            throw Error(ErrorKind::Unsupported, "continuation needs affine2 or moebius1 maps");
          }
        },
        composed, m);
    out.stages.push_back(transport_raster(composed, Direction::Forward, a.raster, field));
  }
  return out;
}

CellRaster slow_basin(const IfsSystem& ifs, const AttractorApprox& a, double r, const Grid& field, int K) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidRadius, "slow basin radius must be positive");
  const CellRaster seed = dilate_by_radius(on_field(a.raster, field), r);
  return inverse_sweep(ifs, seed, K, all_indices(ifs)).level_set(K);
}

CellRaster basin_estimate(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K, double eps) {
  check_cutoff(K);
  for (const MapSpec& m : ifs.maps) {
    if (!is_total(m)) throw Error(ErrorKind::PartialMapsUnsupported, "basin_estimate needs total maps");
  }
  const CellRaster attractor = on_field(a.raster, field);
  CellRaster out(field);
  const auto bounds = attractor.occupied_bounds();
  if (!bounds) return out;
  const RasterDistance dist(attractor);
  const auto dist_to_a = [&](const Point& y) { return y.at_infinity ? kInf : dist(y.x(), y.y()); };

  // Contraction certificate for affine systems: W^k({x}) lies within
  // c^k sup_{a in A} |x - a| of A.
  double contraction = kInf;
  if (ifs.space == ModelSpace::Plane2 && ifs.all_affine()) {
    contraction = 0.0;
    for (const MapSpec& m : ifs.maps) {
      const auto& f = std::get<Affine2>(m);
      contraction = std::max(contraction, singular_values(f.a, f.b, f.c, f.d).max);
    }
  }
  const double certificate = contraction < 1.0 ? std::pow(contraction, K) : kInf;

  const double h = field.h();
  const auto key = [h](double v) {
    return static_cast<std::int64_t>(std::clamp(std::floor(v / h), -1e15, 1e15));
  };
  using Entry = std::tuple<std::int64_t, std::int64_t, bool, Point>;

  parallel_for(field.cell_count(), [&](std::size_t begin, std::size_t end, std::size_t) {
    const auto nx = static_cast<std::size_t>(field.nx);
    std::vector<Point> orbit, next;
    std::vector<Entry> thin;
    for (std::size_t c = begin; c < end; ++c) {
      const Point x = cell_point(field, static_cast<int>(c % nx), static_cast<int>(c / nx));
      if (certificate < kInf) {
        double far = 0.0;
        for (const double bx : {bounds->xmin, bounds->xmax}) {
          for (const double by : {bounds->ymin, bounds->ymax}) far = std::max(far, std::hypot(x.x() - bx, x.y() - by));
        }
        if (certificate * far <= eps) {
          out.set(c);
          continue;
        }
      }
      orbit.assign(1, x);
      for (int k = 0; k <= K; ++k) {
        const bool close =
            std::all_of(orbit.begin(), orbit.end(), [&](const Point& y) { return dist_to_a(y) <= eps; });
        if (close) {
          out.set(c);
          break;
        }
        if (k == K) break;
        thin.clear();
        for (const Point& y : orbit) {
          for (const MapSpec& m : ifs.maps) {
            const Point z = fastbasin::apply(m, y);
            thin.emplace_back(z.at_infinity ? 0 : key(z.x()), z.at_infinity ? 0 : key(z.y()), z.at_infinity, z);
          }
        }
        std::sort(thin.begin(), thin.end(), [](const Entry& l, const Entry& r) {
          return std::tie(std::get<0>(l), std::get<1>(l), std::get<2>(l)) <
                 std::tie(std::get<0>(r), std::get<1>(r), std::get<2>(r));
        });
        next.clear();
        for (std::size_t e = 0; e < thin.size(); ++e) {
          if (e > 0 && std::get<0>(thin[e]) == std::get<0>(thin[e - 1]) &&
              std::get<1>(thin[e]) == std::get<1>(thin[e - 1]) && std::get<2>(thin[e]) == std::get<2>(thin[e - 1])) {
            continue;
          }
          next.push_back(std::get<3>(thin[e]));
        }
        orbit.swap(next);
      }
    }
  });
  return out;
}

}  // namespace fastbasin
