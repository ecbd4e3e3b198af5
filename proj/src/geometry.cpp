#include "fastbasin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fastbasin {

std::size_t dimension(ModelSpace space) noexcept {
  switch (space) {
    case ModelSpace::ExtendedLine: return 1;
    case ModelSpace::Plane2: return 2;
    case ModelSpace::ComplexPlane2: return 4;
    case ModelSpace::Strip2: return 2;
  }
  return 2;
}

const char* to_string(ModelSpace space) noexcept {
  switch (space) {
    case ModelSpace::ExtendedLine: return "line1ext";
    case ModelSpace::Plane2: return "plane2";
    case ModelSpace::ComplexPlane2: return "cplane2";
    case ModelSpace::Strip2: return "strip2";
  }
  return "plane2";
}

double distance(const Point& a, const Point& b) noexcept {
  if (a.at_infinity || b.at_infinity) {
    return (a.at_infinity && b.at_infinity) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double d = a.coords[k] - b.coords[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

bool valid_for(const Point& p, ModelSpace space) noexcept {
  const auto finite = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(p.coords[k])) return false;
    }
    for (std::size_t k = n; k < 4; ++k) {
      if (p.coords[k] != 0.0) return false;
    }
    return true;
  };
  switch (space) {
    case ModelSpace::ExtendedLine:
      return p.at_infinity || finite(1);
    case ModelSpace::Plane2:
      return !p.at_infinity && finite(2);
    case ModelSpace::ComplexPlane2:
      return !p.at_infinity && finite(4);
    case ModelSpace::Strip2:
      return !p.at_infinity && finite(2) && p.x() >= 0.0 && p.x() <= 1.0 && p.y() >= 0.5;
  }
  return false;
}

std::string to_string(const Point& p) {
  if (p.at_infinity) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << '(' << p.coords[0] << ", " << p.coords[1];
  if (p.coords[2] != 0.0 || p.coords[3] != 0.0) os << ", " << p.coords[2] << ", " << p.coords[3];
  os << ')';
  return os.str();
}

double box_distance(const Box& box, double x, double y) noexcept {
  const double dx = std::max({box.xmin - x, 0.0, x - box.xmax});
  const double dy = std::max({box.ymin - y, 0.0, y - box.ymax});
  return std::hypot(dx, dy);
}

}  // namespace fastbasin
