#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "fastbasin/attractor.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/raster.hpp"

namespace fastbasin {

inline constexpr int kMaxGeneration = 254;

/// Per-cell least k with W^k(x) meeting A, up to a cutoff K.
struct GenerationField {
  static constexpr std::uint8_t kUnset = 255;

  Grid grid;
  std::vector<std::uint8_t> gen;
  int K = 0;
  /// Membership tolerance of the forward algorithm; 0 for inverse transport.
  double eps = 0.0;

  GenerationField() = default;
  GenerationField(const Grid& g, int cutoff, double tolerance);

  std::optional<int> at(int i, int j) const {
    const std::uint8_t v = gen[grid.index(i, j)];
    return v == kUnset ? std::nullopt : std::optional<int>(v);
  }
  /// Cells with gen <= k.
  CellRaster level_set(int k) const;
  /// Number of cells with gen == k.
  std::size_t count(int k) const;

  friend bool operator==(const GenerationField&, const GenerationField&) = default;
};

/// "FBG1" exchange format: FBR1 geometry header, then one byte per cell.
std::vector<std::uint8_t> encode_fbg1(const GenerationField& field);
GenerationField decode_fbg1(const std::vector<std::uint8_t>& bytes);
void write_fbg1(const GenerationField& field, const std::filesystem::path& path);
GenerationField read_fbg1(const std::filesystem::path& path);

/// Raster iteration S_0 = A, S_{k+1} = S_k u U_i raster(w_i^-1(S_k)), clipped
/// to the field after each union. Every sweep enlarges the transported cells
/// by the expansion factor of the inverse maps.
GenerationField fast_basin_stepwise(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K);

/// Union over inverse words u of length k of w_u^-1(A), generation = k.
/// Plane2 affine systems use refined pull-back: A is carried as the pieces
/// w_v(B) of its bounding box B, subdivided until w_u^-1 o w_v(B) is no larger
/// than a cell, so generation-k bands keep cell accuracy. Other systems fall
/// back to fast_basin_stepwise. gen 0 is exactly the attractor raster; A is
/// resampled onto the field when its grid differs.
GenerationField fast_basin_inverse(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K);
GenerationField fast_basin_inverse(const IfsSystem& ifs, const AttractorApprox& a, const Box& window, int nx, int K);

/// Bounding box of the union of w_u^-1(bounds) over inverse words with
/// |u| <= K. Plane2 affine systems only. A window containing it holds the
/// whole generation field up to K.
Box fast_basin_extent(const IfsSystem& ifs, const Box& bounds, int K);

/// As fast_basin_inverse, pulling back only through the maps in `indices`
/// (1-based).
GenerationField fast_basin_restricted(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K,
                                      const std::vector<int>& indices);

/// eps-decidable description of an attractor for the forward search.
class AttractorOracle {
 public:
  virtual ~AttractorOracle() = default;
  /// Distance from x to A, or an upper bound on it; +inf for the point at infinity.
  virtual double distance(const Point& x) const = 0;
  /// Ball containing A.
  virtual Point center() const = 0;
  virtual double radius() const = 0;
  virtual bool contains(const Point& x, double eps) const { return distance(x) <= eps; }
};

/// Distance to the occupied cells of an attractor raster.
class RasterOracle final : public AttractorOracle {
 public:
  explicit RasterOracle(const CellRaster& raster);
  double distance(const Point& x) const override;
  Point center() const override { return center_; }
  double radius() const override { return radius_; }

 private:
  RasterDistance dist_;
  Point center_;
  double radius_ = 0.0;
};

/// Attractor of a contractive Plane2 affine system, described by the maps
/// alone: pieces w_u(D) of an invariant disk D are refined best-first.
/// distance() is an upper bound within `tol` of the true distance; contains()
/// decides d(x, A) <= eps up to 1e-12.
class AffineAttractorOracle final : public AttractorOracle {
 public:
  AffineAttractorOracle(const IfsSystem& ifs, double tol);
  double distance(const Point& x) const override;
  bool contains(const Point& x, double eps) const override;
  Point center() const override { return Point::plane(c_.x, c_.y); }
  double radius() const override { return radius_; }

 private:
  // Returns an upper bound u on d(x, A); stops once every open piece has a
  // lower bound above `stop_above` or within `tol` of u, or u <= stop_below.
  double search(const Point& x, double tol, double stop_below, double stop_above) const;

  std::vector<Affine2> maps_;
  std::vector<double> lip_;
  Vec2 c_;
  double radius_ = 0.0;
  double tol_;
};

/// A = [lo, hi] on the extended line.
class IntervalOracle final : public AttractorOracle {
 public:
  IntervalOracle(double lo, double hi) : lo_(lo), hi_(hi) {}
  double distance(const Point& x) const override;
  Point center() const override { return Point::line(0.5 * (lo_ + hi_)); }
  double radius() const override { return 0.5 * (hi_ - lo_); }

 private:
  double lo_, hi_;
};

/// A = the segment from a to b in the plane.
class SegmentOracle final : public AttractorOracle {
 public:
  SegmentOracle(Vec2 a, Vec2 b) : a_(a), b_(b) {}
  double distance(const Point& x) const override;
  Point center() const override;
  double radius() const override;

 private:
  Vec2 a_, b_;
};

/// A = {(z, z^2) : z in the square |Re z|, |Im z| <= half_side} in C^2.
/// distance() is an upper bound: the gap to the graph point over z clamped to
/// the square. It is exact on the graph itself.
class ParabolaOracle final : public AttractorOracle {
 public:
  explicit ParabolaOracle(double half_side = 1.0) : s_(half_side) {}
  double distance(const Point& x) const override;
  Point center() const override { return Point::complex(0.0, 0.0); }
  double radius() const override;

 private:
  double s_;
};

/// Where the forward tolerance is measured.
enum class ToleranceFrame {
  /// d(w_u(x), A) <= eps.
  Attractor,
  /// d(w_u(x), A) <= eps * prod co_lipschitz(w_i) over the applied maps,
  /// which implies d(x, w_u^-1(A)) <= eps: the tolerance lives in the field.
  Field,
};

/// Least k <= K such that some word of length k maps x within eps of A.
/// Depth-first over the word tree, bounded by the best depth found so far and
/// pruned when a lower bound on the distance to the ball around A, propagated
/// through the remaining depth, exceeds the ball radius plus eps.
std::optional<int> generation_forward(const IfsSystem& ifs, const Point& x, const AttractorOracle& a, int K,
                                      double eps, ToleranceFrame frame = ToleranceFrame::Attractor);

/// generation_forward at every cell centre of the field.
GenerationField fast_basin_forward(const IfsSystem& ifs, const AttractorOracle& a, const Grid& field, int K,
                                   double eps, ToleranceFrame frame = ToleranceFrame::Attractor);

struct ContinuationApprox {
  Word word_prefix;
  /// stages[k] approximates w_{t1}^-1 o ... o w_{tk}^-1 (A).
  std::vector<CellRaster> stages;
};

/// Stage k is w_{t1}^-1 o ... o w_{tk}^-1 (A). Plane2 affine systems render it
/// piecewise at cell accuracy, as fast_basin_inverse does; other systems
/// transport the attractor raster once through the composed map.
ContinuationApprox continuation(const IfsSystem& ifs, const Word& prefix, const AttractorApprox& a, const Grid& field);

/// Inverse transport seeded with the cells within distance r of A; returns
/// the union of all stages up to K.
CellRaster slow_basin(const IfsSystem& ifs, const AttractorApprox& a, double r, const Grid& field, int K);

/// Cells whose centre x has sup{d(y, A) : y in W^k({x})} <= eps for some
/// k <= K. Orbit sets are thinned to one point per cell of side h. For affine
/// systems the contraction bound c^k max|x - a| <= eps certifies a cell early.
CellRaster basin_estimate(const IfsSystem& ifs, const AttractorApprox& a, const Grid& field, int K, double eps);

}  // namespace fastbasin
