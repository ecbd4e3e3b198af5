#pragma once

#include <complex>
#include <variant>

#include "fastbasin/geometry.hpp"

namespace fastbasin {

/// (x, y) -> (a x + b y + tx, c x + d y + ty)
struct Affine2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
  double tx = 0.0, ty = 0.0;

  double det() const { return a * d - b * c; }
  friend bool operator==(const Affine2&, const Affine2&) = default;
};

/// x -> (p x + q) / (r x + s) on the extended line.
struct Moebius1 {
  double p = 1.0, q = 0.0, r = 0.0, s = 1.0;

  double det() const { return p * s - q * r; }
  friend bool operator==(const Moebius1&, const Moebius1&) = default;
};

/// (z, w) -> (m11 z + t1, m21 z + m22 w + t2)
struct ComplexAffine2 {
  std::complex<double> m11{1.0, 0.0};
  std::complex<double> m21{0.0, 0.0};
  std::complex<double> m22{1.0, 0.0};
  std::complex<double> t1{0.0, 0.0};
  std::complex<double> t2{0.0, 0.0};

  friend bool operator==(const ComplexAffine2&, const ComplexAffine2&) = default;
};

/// (x, y) -> (x/2 + tx, sqrt(y)) on the strip [0,1] x [1/2, inf); tx is 0 or 1/2.
/// Only a homeomorphism onto its image.
struct HalfSqrt {
  double tx = 0.0;

  friend bool operator==(const HalfSqrt&, const HalfSqrt&) = default;
};

using MapSpec = std::variant<Affine2, Moebius1, ComplexAffine2, HalfSqrt>;

enum class Direction { Forward, Inverse };

ModelSpace native_space(const MapSpec& map) noexcept;

/// Whether the map is a bijection of its model space onto itself.
bool is_total(const MapSpec& map) noexcept;

/// Throws SingularMap when the determinant / denominator condition fails.
void validate(const MapSpec& map);

Point apply(const MapSpec& map, const Point& x);
Point apply_inverse(const MapSpec& map, const Point& y);

inline Point apply(const MapSpec& map, Direction direction, const Point& x) {
  return direction == Direction::Forward ? apply(map, x) : apply_inverse(map, x);
}

Affine2 inverse(const Affine2& m);
Moebius1 inverse(const Moebius1& m);
/// outer o inner
Affine2 compose(const Affine2& outer, const Affine2& inner);
Moebius1 compose(const Moebius1& outer, const Moebius1& inner);

struct SingularValues {
  double max = 0.0;
  double min = 0.0;
};

SingularValues singular_values(double a, double b, double c, double d) noexcept;
SingularValues singular_values(const ComplexAffine2& m) noexcept;

/// Largest forward Lipschitz constant of the map on the region (a box in the
/// plane; for the line only [xmin, xmax] is used). +inf when a pole lies in it.
double forward_lipschitz(const MapSpec& map, const Box& region);

/// Largest L with d(w^-1(y1), w^-1(y2)) >= L d(y1, y2) for y1, y2 in the region.
/// The region is ignored for the affine families. With require_expansive set,
/// L <= 1 raises NotExpansive.
double inverse_expansivity(const MapSpec& map, const Box& region, bool require_expansive = false);

/// Global lower bound l with |w(y) - w(p)| >= l |y - p|; 0 when no useful
/// global bound exists (Moebius, HalfSqrt).
double co_lipschitz(const MapSpec& map) noexcept;

}  // namespace fastbasin
