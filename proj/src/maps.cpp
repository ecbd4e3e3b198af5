#include "fastbasin/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastbasin/error.hpp"

namespace fastbasin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Point moebius_eval(const Moebius1& m, const Point& x) {
  if (x.at_infinity) {
    if (m.r == 0.0) return Point::infinity();
    return Point::line(m.p / m.r);
  }
  const double den = m.r * x.x() + m.s;
  if (den == 0.0) return Point::infinity();
  return Point::line((m.p * x.x() + m.q) / den);
}

// Image of the half-sqrt map: [tx, tx + 1/2] x [sqrt(1/2), inf).
bool in_halfsqrt_image(const HalfSqrt& m, const Point& y) {
  constexpr double kSlack = 1e-12;
  return !y.at_infinity && y.x() >= m.tx - kSlack && y.x() <= m.tx + 0.5 + kSlack &&
         y.y() >= std::sqrt(0.5) - kSlack;
}

}  // namespace

ModelSpace native_space(const MapSpec& map) noexcept {
  return std::visit(overloaded{
                        [](const Affine2&) { return ModelSpace::Plane2; },
                        [](const Moebius1&) { return ModelSpace::ExtendedLine; },
                        [](const ComplexAffine2&) { return ModelSpace::ComplexPlane2; },
                        [](const HalfSqrt&) { return ModelSpace::Strip2; },
                    },
                    map);
}

bool is_total(const MapSpec& map) noexcept { return !std::holds_alternative<HalfSqrt>(map); }

void validate(const MapSpec& map) {
  std::visit(overloaded{
                 [](const Affine2& m) {
                   if (!(std::abs(m.det()) > 0.0)) {
                     throw Error(ErrorKind::SingularMap, "affine2 map has zero determinant");
                   }
                 },
                 [](const Moebius1& m) {
                   if (!(std::abs(m.det()) > 0.0)) {
                     throw Error(ErrorKind::SingularMap, "moebius1 map has ps - qr = 0");
                   }
                 },
                 [](const ComplexAffine2& m) {
                   if (m.m11 == 0.0 || m.m22 == 0.0) {
                     throw Error(ErrorKind::SingularMap, "caffine2 map needs m11 != 0 and m22 != 0");
                   }
                 },
                 [](const HalfSqrt& m) {
                   if (m.tx != 0.0 && m.tx != 0.5) {
                     throw Error(ErrorKind::SingularMap, "halfsqrt offset must be 0 or 0.5");
                   }
                 },
             },
             map);
}

Point apply(const MapSpec& map, const Point& x) {
  return std::visit(
      overloaded{
          [&](const Affine2& m) {
            return Point::plane(m.a * x.x() + m.b * x.y() + m.tx, m.c * x.x() + m.d * x.y() + m.ty);
          },
          [&](const Moebius1& m) { return moebius_eval(m, x); },
          [&](const ComplexAffine2& m) {
            const auto z = x.z();
            const auto w = x.w();
            return Point::complex(m.m11 * z + m.t1, m.m21 * z + m.m22 * w + m.t2);
          },
          [&](const HalfSqrt& m) {
            if (!valid_for(x, ModelSpace::Strip2)) {
              throw Error(ErrorKind::OutsideDomain, "halfsqrt applied outside the strip at " + to_string(x));
            }
            return Point::plane(x.x() / 2.0 + m.tx, std::sqrt(x.y()));
          },
      },
      map);
}

Point apply_inverse(const MapSpec& map, const Point& y) {
  return std::visit(
      overloaded{
          [&](const Affine2& m) { return apply(inverse(m), y); },
          [&](const Moebius1& m) { return moebius_eval(inverse(m), y); },
          [&](const ComplexAffine2& m) {
            const auto z = (y.z() - m.t1) / m.m11;
            const auto w = (y.w() - m.t2 - m.m21 * z) / m.m22;
            return Point::complex(z, w);
          },
          [&](const HalfSqrt& m) {
            if (!in_halfsqrt_image(m, y)) {
              throw Error(ErrorKind::OutsideImage, "point " + to_string(y) + " is outside the halfsqrt image");
            }
            const double x = std::clamp(2.0 * (y.x() - m.tx), 0.0, 1.0);
            return Point::plane(x, y.y() * y.y());
          },
      },
      map);
}

Affine2 inverse(const Affine2& m) {
  const double det = m.det();
  Affine2 inv;
  inv.a = m.d / det;
  inv.b = -m.b / det;
  inv.c = -m.c / det;
  inv.d = m.a / det;
  inv.tx = -(inv.a * m.tx + inv.b * m.ty);
  inv.ty = -(inv.c * m.tx + inv.d * m.ty);
  return inv;
}

Moebius1 inverse(const Moebius1& m) { return Moebius1{m.s, -m.q, -m.r, m.p}; }

Affine2 compose(const Affine2& outer, const Affine2& inner) {
  Affine2 out;
  out.a = outer.a * inner.a + outer.b * inner.c;
  out.b = outer.a * inner.b + outer.b * inner.d;
  out.c = outer.c * inner.a + outer.d * inner.c;
  out.d = outer.c * inner.b + outer.d * inner.d;
  out.tx = outer.a * inner.tx + outer.b * inner.ty + outer.tx;
  out.ty = outer.c * inner.tx + outer.d * inner.ty + outer.ty;
  return out;
}

Moebius1 compose(const Moebius1& outer, const Moebius1& inner) {
  return Moebius1{outer.p * inner.p + outer.q * inner.r, outer.p * inner.q + outer.q * inner.s,
                  outer.r * inner.p + outer.s * inner.r, outer.r * inner.q + outer.s * inner.s};
}

SingularValues singular_values(double a, double b, double c, double d) noexcept {
  // Eigenvalues of M^T M, closed form.
  const double p = a * a + c * c;
  const double q = a * b + c * d;
  const double r = b * b + d * d;
  const double half_trace = 0.5 * (p + r);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (p - r) * (p - r) + q * q));
  const double big = half_trace + disc;
  const double det = std::abs(a * d - b * c);
  const double smax = std::sqrt(big);
  const double smin = smax > 0.0 ? det / smax : 0.0;
  return {smax, smin};
}

SingularValues singular_values(const ComplexAffine2& m) noexcept {
  // Singular values of [[m11, 0], [m21, m22]] from M^H M.
  const double p = std::norm(m.m11) + std::norm(m.m21);
  const double r = std::norm(m.m22);
  const double q = std::abs(std::conj(m.m21) * m.m22);
  const double half_trace = 0.5 * (p + r);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (p - r) * (p - r) + q * q));
  const double smax = std::sqrt(half_trace + disc);
  const double det = std::abs(m.m11 * m.m22);
  return {smax, smax > 0.0 ? det / smax : 0.0};
}

double forward_lipschitz(const MapSpec& map, const Box& region) {
  return std::visit(
      overloaded{
          [](const Affine2& m) { return singular_values(m.a, m.b, m.c, m.d).max; },
          [&](const Moebius1& m) {
            // |w'(x)| = |det| / (r x + s)^2, largest at the point nearest the pole.
            if (m.r == 0.0) return std::abs(m.det() / (m.s * m.s));
            const double pole = -m.s / m.r;
            if (pole >= region.xmin && pole <= region.xmax) return kInf;
            const double x = (pole < region.xmin) ? region.xmin : region.xmax;
            const double den = m.r * x + m.s;
            return std::abs(m.det()) / (den * den);
          },
          [](const ComplexAffine2& m) { return singular_values(m).max; },
          [&](const HalfSqrt&) {
            const double ymin = std::max(region.ymin, 0.5);
            return std::max(0.5, 0.5 / std::sqrt(ymin));
          },
      },
      map);
}

double inverse_expansivity(const MapSpec& map, const Box& region, bool require_expansive) {
  const double expansion = std::visit(
      overloaded{
          [](const Affine2& m) { return 1.0 / singular_values(m.a, m.b, m.c, m.d).max; },
          [&](const Moebius1& m) {
            // (w^-1)'(y) = det / (p - r y)^2; the minimum over an interval sits
            // at the endpoint farthest from the pole y = p / r.
            if (m.r == 0.0) return std::abs(m.det()) / (m.p * m.p);
            const auto deriv = [&](double y) {
              const double den = m.p - m.r * y;
              return std::abs(m.det()) / (den * den);
            };
            return std::min(deriv(region.xmin), deriv(region.xmax));
          },
          [](const ComplexAffine2& m) { return 1.0 / singular_values(m).max; },
          [&](const HalfSqrt&) {
            // w^-1(x, y) = (2 (x - tx), y^2); Jacobian diag(2, 2y).
            const double ymin = std::max(region.ymin, std::sqrt(0.5));
            return std::min(2.0, 2.0 * ymin);
          },
      },
      map);
  if (require_expansive && !(expansion > 1.0)) {
    throw Error(ErrorKind::NotExpansive,
                "inverse map is not expansive (L = " + std::to_string(expansion) + ")");
  }
  return expansion;
}

double co_lipschitz(const MapSpec& map) noexcept {
  return std::visit(overloaded{
                        [](const Affine2& m) { return singular_values(m.a, m.b, m.c, m.d).min; },
                        [](const Moebius1&) { return 0.0; },
                        [](const ComplexAffine2& m) { return singular_values(m).min; },
                        [](const HalfSqrt&) { return 0.0; },
                    },
                    map);
}

}  // namespace fastbasin
