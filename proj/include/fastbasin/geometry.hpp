#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>

namespace fastbasin {

enum class ModelSpace {
  ExtendedLine,   // R u {inf}
  Plane2,         // R^2
  ComplexPlane2,  // C^2 stored as (re z, im z, re w, im w)
  Strip2,         // [0,1] x [1/2, inf)
};

std::size_t dimension(ModelSpace space) noexcept;
const char* to_string(ModelSpace space) noexcept;

/// A point of one of the model spaces. Unused coordinates stay zero so the
/// Euclidean distance below is meaningful for every space.
struct Point {
  std::array<double, 4> coords{};
  bool at_infinity = false;

  static Point line(double x) { return Point{{x, 0.0, 0.0, 0.0}, false}; }
  static Point infinity() { return Point{{0.0, 0.0, 0.0, 0.0}, true}; }
  static Point plane(double x, double y) { return Point{{x, y, 0.0, 0.0}, false}; }
  static Point complex(std::complex<double> z, std::complex<double> w) {
    return Point{{z.real(), z.imag(), w.real(), w.imag()}, false};
  }

  double x() const { return coords[0]; }
  double y() const { return coords[1]; }
  std::complex<double> z() const { return {coords[0], coords[1]}; }
  std::complex<double> w() const { return {coords[2], coords[3]}; }

  friend bool operator==(const Point&, const Point&) = default;
};

/// Euclidean distance; infinity is at distance +inf from every finite point
/// and at distance 0 from itself.
double distance(const Point& a, const Point& b) noexcept;

bool valid_for(const Point& p, ModelSpace space) noexcept;

std::string to_string(const Point& p);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Closed axis-aligned box.
struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  bool contains(const Box& other) const {
    return other.xmin >= xmin && other.xmax <= xmax && other.ymin >= ymin &&
           other.ymax <= ymax;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Distance from (x, y) to the closed box (0 inside).
double box_distance(const Box& box, double x, double y) noexcept;

}  // namespace fastbasin
