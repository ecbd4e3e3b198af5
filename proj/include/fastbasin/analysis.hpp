#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastbasin/attractor.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/raster.hpp"

namespace fastbasin {

struct DimensionEstimate {
  double estimate = 0.0;
  /// Largest absolute deviation of a point from the fitted line.
  double residual = 0.0;
  /// (box side in cells, occupied boxes) per scale, coarsest first.
  std::vector<std::pair<int, std::size_t>> counts;
};

/// Least-squares slope of log N(s) against log(1/s) for dyadic box sides s
/// from `coarsest` down to `finest` cells. Throws DegenerateScaleRange for
/// fewer than three scales.
DimensionEstimate box_dimension(const CellRaster& raster, int coarsest, int finest);
/// Coarsest side a quarter of the occupied extent; finest a quarter of that,
/// capped at 8 cells.
DimensionEstimate box_dimension(const CellRaster& raster);

/// Occupied components under 4- or 8-adjacency.
int connected_components(const CellRaster& raster, int adjacency = 8);

/// Side (in cells) of the largest fully occupied axis-aligned square.
int max_solid_square(const CellRaster& raster);

struct CriterionResult {
  bool nontrivial = false;
  /// 1-based indices with d_H(w_i(A), A) > tol.
  std::vector<int> proper;
  std::vector<double> per_map_hausdorff;
  /// Set for partial maps, where w_i(A) != A does not imply a larger fast basin.
  bool partial_map_caveat = false;
  double tol = 0.0;
};

/// d_H(raster(w_i(A)), A) per map; tol < 0 selects 3h.
CriterionResult criterion_check(const IfsSystem& ifs, const AttractorApprox& a, double tol = -1.0);

struct ExpansivityResult {
  bool ok = false;
  double L = 0.0;
  double rho = 0.0;
  double r0 = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
};

/// rho = max_i d(w_i^-1(x0), x0), r0 = rho / (L - L_tilde); then checks
/// d(w_i^-1(x), x0) >= L_tilde d(x, x0) at random x with d(x, x0) >= r0.
/// L is the smallest inverse expansivity over a box of half-width 4 r0 + 1
/// around x0. Throws NotExpansive unless L > L_tilde > 1.
ExpansivityResult expansivity_check(const IfsSystem& ifs, const Point& x0, double L_tilde, std::size_t samples,
                                    std::uint64_t seed = 1);

/// Random reverse orbits y_{m+1} = w_i^-1(y_m) started beyond r0; checks
/// d(y_{n+m}, x0) >= L_tilde^n d(y_m, x0) for all pairs with d(y_m, x0) > r0.
ExpansivityResult reverse_orbit_check(const IfsSystem& ifs, const Point& x0, double L_tilde, double r0,
                                      std::size_t orbits, int length, std::uint64_t seed = 1);

struct EscapeResult {
  Point a;
  int achieved = 0;
  double delta = 0.0;
  double Delta = 0.0;
  double L = 0.0;
};

/// Searches chaos-game samples of A and their images under powers of
/// w_theta1 for a with 0 < delta(a) < Delta(a) / (n L^n), delta(a) =
/// d(a, w_theta1^-1(a)), Delta(a) = radius - d(a, centre), L the Lipschitz
/// constant of w_theta1^-1. Among those it returns the one with the shortest
/// stay time t(a) (steps the orbit w_theta1^-k(a) remains in the disk), which
/// makes t nondecreasing in n. Throws NotFound when no sample qualifies.
EscapeResult escape_time_demo(const IfsSystem& ifs, const AttractorApprox& a, int theta1, const Point& disk_center,
                              double disk_radius, int n_target, std::uint64_t seed = 1);

struct AnalysisOptions {
  int nx = 512;
  int K = 4;
  /// <= 0 selects the cell size.
  double eps = 0.0;
  std::uint64_t seed = 1;
  /// Escape-time targets 1..escape_max; 0 skips the demo.
  int escape_max = 5;
};

/// Flat metrics of one run; serialised as key=value lines.
struct AnalysisReport {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, bool value);
  std::optional<std::string> get(const std::string& key) const;
  std::string to_text() const;
  static AnalysisReport parse(const std::string& text);
};

/// The default pipeline: attractor, fast basin, dimension, components, solid
/// squares, criterion, expansivity and (when applicable) escape times.
AnalysisReport analyze(const IfsSystem& ifs, const AnalysisOptions& options);

}  // namespace fastbasin
