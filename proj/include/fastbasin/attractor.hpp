#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fastbasin/ifs.hpp"
#include "fastbasin/raster.hpp"

namespace fastbasin {

struct AttractorApprox {
  CellRaster raster;
  std::string ifs_name;
  /// d_H(raster, raster of W(raster)) at the raster's own resolution.
  double self_consistency = 0.0;
  int iterations = 0;
};

/// Grid used for a system's rasters: a line grid for ExtendedLine systems,
/// square cells otherwise. ComplexPlane2 systems raise Unsupported.
Grid grid_for(const IfsSystem& ifs, const Box& window, int nx);

/// Iterates S <- raster(W(S)) from the full grid until it stops changing.
/// Throws NotContractive when some map has forward Lipschitz constant >= 1 on
/// the window and DidNotStabilize after max_iters changing sweeps.
AttractorApprox compute_attractor(const IfsSystem& ifs, const Grid& grid, int max_iters = 1000);
AttractorApprox compute_attractor(const IfsSystem& ifs, const Box& window, int nx, int max_iters = 1000);

/// Box containing the attractor of a contractive Plane2 affine system, padded
/// by `margin` times its larger side.
Box affine_attractor_box(const IfsSystem& ifs, double margin = 1.0 / 16.0);

/// The config's attractor_window, else the automatic affine box, else the
/// config's window. Throws InvalidArgument when none applies.
Box attractor_window(const IfsSystem& ifs);

/// View window: the config's window, else the attractor window.
Box view_window(const IfsSystem& ifs);

/// Attractor raster on `field`: computed on the aligned sub-grid covering the
/// attractor window and copied cell for cell into the field grid.
AttractorApprox attractor_on(const IfsSystem& ifs, const Grid& field, int max_iters = 1000);

/// Random-iteration sampler. Map indices come from a counter-based stream
/// keyed by seed, so the output is a pure function of the arguments.
std::vector<Point> chaos_game(const IfsSystem& ifs, std::size_t n_points, std::size_t burn_in, std::uint64_t seed);

/// splitmix64 finaliser of (seed, counter).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) noexcept;
/// Uniform double in [0, 1) from (seed, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept;

/// num / 2^exp
struct Dyadic {
  std::uint64_t num = 0;
  int exp = 0;

  /// Exact conversion of a double in [0, 1]; throws InvalidArgument otherwise.
  static Dyadic from_double(double value);
};

/// Whether (x, y) lies in the gasket with vertices (0,0), (1,0), (0,1): some
/// binary expansions of x and y never share a 1 digit.
bool gasket_member(const Dyadic& x, const Dyadic& y);
bool gasket_member(double x, double y);

}  // namespace fastbasin
