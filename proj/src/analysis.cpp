#include "fastbasin/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fastbasin/basin.hpp"
#include "fastbasin/error.hpp"
#include "fastbasin/transport.hpp"

namespace fastbasin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool power_of_two(int n) { return n > 0 && std::has_single_bit(static_cast<unsigned>(n)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out += ',';
    out += fmt(items[k]);
  }
  return out;
}

// Unit direction in the coordinates used by the space, from (seed, counter).
Point random_offset(ModelSpace space, double r, std::uint64_t seed, std::uint64_t counter) {
  switch (space) {
    case ModelSpace::ExtendedLine:
      return Point::line(counter_uniform(seed, counter) < 0.5 ? -r : r);
    case ModelSpace::ComplexPlane2: {
      std::array<double, 4> g{};
      double norm = 0.0;
      for (std::size_t k = 0; k < 4; k += 2) {
        const double u1 = std::max(counter_uniform(seed, 4 * counter + k), 1e-300);
        const double u2 = counter_uniform(seed, 4 * counter + k + 1);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        g[k] = rad * std::cos(2.0 * std::numbers::pi * u2);
        g[k + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
      }
      for (const double v : g) norm += v * v;
      norm = std::sqrt(norm);
      return Point::complex({r * g[0] / norm, r * g[1] / norm}, {r * g[2] / norm, r * g[3] / norm});
    }
    default: {
      const double t = 2.0 * std::numbers::pi * counter_uniform(seed, counter);
      return Point::plane(r * std::cos(t), r * std::sin(t));
    }
  }
}

Point offset(const Point& x0, const Point& d) {
  Point p = x0;
  for (std::size_t k = 0; k < 4; ++k) p.coords[k] += d.coords[k];
  return p;
}

double inverse_expansion_bound(const IfsSystem& ifs, const Point& x0) {
  const Box region = ifs.window ? *ifs.window : Box{x0.x() - 10.0, x0.y() - 10.0, x0.x() + 10.0, x0.y() + 10.0};
  double L = kInf;
  for (const MapSpec& m : ifs.maps) L = std::min(L, inverse_expansivity(m, region));
  return L;
}

void require_total(const IfsSystem& ifs, const char* what) {
  if (!ifs.all_total()) throw Error(ErrorKind::PartialMapsUnsupported, std::string(what) + " needs total maps");
}

}  // namespace

DimensionEstimate box_dimension(const CellRaster& raster, int coarsest, int finest) {
  if (!power_of_two(coarsest) || !power_of_two(finest) || finest > coarsest) {
    throw Error(ErrorKind::InvalidArgument, "box sides must be powers of two with finest <= coarsest");
  }
  if (raster.empty()) throw Error(ErrorKind::InvalidArgument, "box_dimension of an empty raster");
  const int scales = std::countr_zero(static_cast<unsigned>(coarsest)) - std::countr_zero(static_cast<unsigned>(finest)) + 1;
  if (scales < 3) throw Error(ErrorKind::DegenerateScaleRange, "box counting needs at least three dyadic scales");

  // Occupancy at the finest box size, then halve the resolution repeatedly.
  int bx = (raster.nx() + finest - 1) / finest;
  int by = (raster.ny() + finest - 1) / finest;
  std::vector<std::uint8_t> level(static_cast<std::size_t>(bx) * by, 0);
  for (int j = 0; j < raster.ny(); ++j) {
    for (int i = 0; i < raster.nx(); ++i) {
      if (raster.test(i, j)) level[static_cast<std::size_t>(j / finest) * bx + i / finest] = 1;
    }
  }
  DimensionEstimate out;
  for (int s = finest;; s *= 2) {
    out.counts.emplace_back(s, static_cast<std::size_t>(std::count(level.begin(), level.end(), 1)));
    if (s == coarsest) break;
    const int nbx = (bx + 1) / 2, nby = (by + 1) / 2;
    std::vector<std::uint8_t> up(static_cast<std::size_t>(nbx) * nby, 0);
    for (int j = 0; j < by; ++j) {
      for (int i = 0; i < bx; ++i) {
        if (level[static_cast<std::size_t>(j) * bx + i]) up[static_cast<std::size_t>(j / 2) * nbx + i / 2] = 1;
      }
    }
    level.swap(up);
    bx = nbx;
    by = nby;
  }
  std::reverse(out.counts.begin(), out.counts.end());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(out.counts.size());
  std::vector<std::pair<double, double>> pts;
  for (const auto& [s, count] : out.counts) {
    const double x = -std::log(static_cast<double>(s) * raster.h());
    const double y = std::log(static_cast<double>(count));
    pts.emplace_back(x, y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  out.estimate = slope;
  for (const auto& [x, y] : pts) out.residual = std::max(out.residual, std::abs(y - (intercept + slope * x)));
  return out;
}

DimensionEstimate box_dimension(const CellRaster& raster) {
  const auto b = raster.occupied_bounds();
  if (!b) throw Error(ErrorKind::InvalidArgument, "box_dimension of an empty raster");
  const double extent = std::max(b->width(), raster.grid().is_line() ? 0.0 : b->height()) / raster.h();
  const auto coarsest = static_cast<int>(std::bit_floor(static_cast<unsigned>(std::max(extent / 4.0, 1.0))));
  return box_dimension(raster, coarsest, std::clamp(coarsest / 4, 1, 8));
}

int connected_components(const CellRaster& raster, int adjacency) {
  if (adjacency != 4 && adjacency != 8) throw Error(ErrorKind::InvalidArgument, "adjacency must be 4 or 8");
  const int nx = raster.nx(), ny = raster.ny();
  std::vector<std::uint8_t> seen(raster.grid().cell_count(), 0);
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int j0 = 0; j0 < ny; ++j0) {
    for (int i0 = 0; i0 < nx; ++i0) {
      const std::size_t c0 = raster.grid().index(i0, j0);
      if (!raster.test(c0) || seen[c0]) continue;
      ++components;
      seen[c0] = 1;
      stack.assign(1, {i0, j0});
      while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if ((di == 0 && dj == 0) || (adjacency == 4 && di != 0 && dj != 0)) continue;
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
            const std::size_t c = raster.grid().index(ii, jj);
            if (raster.test(c) && !seen[c]) {
              seen[c] = 1;
              stack.emplace_back(ii, jj);
            }
          }
        }
      }
    }
  }
  return components;
}

int max_solid_square(const CellRaster& raster) {
  const int nx = raster.nx(), ny = raster.ny();
  std::vector<int> prev(static_cast<std::size_t>(nx) + 1, 0), cur(prev.size(), 0);
  int best = 0;
  for (int j = 0; j < ny; ++j) {
    cur[0] = 0;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) + 1;
      cur[k] = raster.test(i, j) ? 1 + std::min({prev[k], prev[k - 1], cur[k - 1]}) : 0;
      best = std::max(best, cur[k]);
    }
    prev.swap(cur);
  }
  return best;
}

CriterionResult criterion_check(const IfsSystem& ifs, const AttractorApprox& a, double tol) {
  CriterionResult out;
  out.tol = tol < 0.0 ? 3.0 * a.raster.h() : tol;
  out.partial_map_caveat = !ifs.all_total();
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const CellRaster image = transport_raster(ifs.maps[i], Direction::Forward, a.raster, a.raster.grid());
    const double d = hausdorff_distance(image, a.raster);
    out.per_map_hausdorff.push_back(d);
    if (d > out.tol) out.proper.push_back(static_cast<int>(i) + 1);
  }
  out.nontrivial = !out.proper.empty();
  return out;
}

ExpansivityResult expansivity_check(const IfsSystem& ifs, const Point& x0, double L_tilde, std::size_t samples,
                                    std::uint64_t seed) {
  require_total(ifs, "expansivity_check");
  ExpansivityResult out;
  out.L = inverse_expansion_bound(ifs, x0);
  if (!(L_tilde > 1.0) || !(out.L > L_tilde)) {
    throw Error(ErrorKind::NotExpansive, "inverse maps are not L-expansive with L > L_tilde > 1 (L = " +
                                             format_double(out.L) + ")");
  }
  for (const MapSpec& m : ifs.maps) out.rho = std::max(out.rho, distance(apply_inverse(m, x0), x0));
  out.r0 = out.rho / (out.L - L_tilde);
  for (std::size_t s = 0; s < samples; ++s) {
    const double r = out.r0 + counter_uniform(seed, 2 * s) * (3.0 * out.r0 + 1.0);
    const Point x = offset(x0, random_offset(ifs.space, r, seed ^ 0x5bd1e995ULL, s));
    const double dx = distance(x, x0);
    for (const MapSpec& m : ifs.maps) {
      ++out.checked;
      if (distance(apply_inverse(m, x), x0) < L_tilde * dx * (1.0 - 1e-12) - 1e-12) ++out.failures;
    }
  }
  out.ok = out.failures == 0;
  return out;
}

ExpansivityResult reverse_orbit_check(const IfsSystem& ifs, const Point& x0, double L_tilde, double r0,
                                      std::size_t orbits, int length, std::uint64_t seed) {
  require_total(ifs, "reverse_orbit_check");
  ExpansivityResult out;
  out.r0 = r0;
  const std::uint64_t n = ifs.size();
  std::vector<Point> orbit;
  for (std::size_t o = 0; o < orbits; ++o) {
    const double r = r0 * (1.0 + counter_uniform(seed, 3 * o)) + 1e-9;
    orbit.assign(1, offset(x0, random_offset(ifs.space, r, seed ^ 0x27d4eb2fULL, o)));
    for (int step = 0; step < length; ++step) {
      const std::uint64_t pick = counter_hash(seed + 0x9e37ULL, o * 1024 + static_cast<std::uint64_t>(step)) % n;
      orbit.push_back(apply_inverse(ifs.maps[pick], orbit.back()));
    }
    for (int m = 0; m <= length; ++m) {
      const double dm = distance(orbit[m], x0);
      if (!(dm > r0)) continue;
      for (int k = 1; m + k <= length; ++k) {
        ++out.checked;
        if (distance(orbit[m + k], x0) < std::pow(L_tilde, k) * dm * (1.0 - 1e-12)) ++out.failures;
      }
    }
  }
  out.ok = out.failures == 0;
  return out;
}

EscapeResult escape_time_demo(const IfsSystem& ifs, const AttractorApprox& a, int theta1, const Point& disk_center,
                              double disk_radius, int n_target, std::uint64_t seed) {
  if (n_target < 0) throw Error(ErrorKind::InvalidArgument, "n_target must be >= 0");
  const MapSpec& w = ifs.map(theta1);
  double L = 0.0;
  if (const auto* m = std::get_if<Affine2>(&w)) {
    L = 1.0 / singular_values(m->a, m->b, m->c, m->d).min;
  } else if (const auto* m = std::get_if<ComplexAffine2>(&w)) {
    L = 1.0 / singular_values(*m).min;
  } else {
    throw Error(ErrorKind::Unsupported, "escape_time_demo needs affine maps");
  }
  if (ifs.space != ModelSpace::ComplexPlane2) {
    if (const auto b = a.raster.occupied_bounds()) {
      for (const double x : {b->xmin, b->xmax}) {
        for (const double y : {b->ymin, b->ymax}) {
          if (distance(Point::plane(x, y), disk_center) > disk_radius) {
            throw Error(ErrorKind::InvalidArgument, "disk does not contain the attractor");
          }
        }
      }
    }
  }

  std::vector<Point> candidates;
  const auto samples = chaos_game(ifs, 4000, 64, seed);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    candidates.push_back(samples[s]);
    if (s < 200) {
      Point p = samples[s];
      for (int m = 0; m < 48; ++m) {
        p = fastbasin::apply(w, p);
        candidates.push_back(p);
      }
    }
  }

  const double bound = static_cast<double>(n_target) * std::pow(L, n_target);
  std::optional<EscapeResult> best;
  for (const Point& p : candidates) {
    const double delta = distance(p, apply_inverse(w, p));
    const double Delta = disk_radius - distance(p, disk_center);
    if (!(delta > 0.0) || !(Delta > 0.0)) continue;
    if (n_target > 0 && !(delta * bound < Delta)) continue;
    int stay = 0;
    Point y = p;
    while (stay < 100000) {
      y = apply_inverse(w, y);
      if (distance(y, disk_center) > disk_radius) break;
      ++stay;
    }
    if (stay < n_target) continue;
    if (!best || stay < best->achieved) {
      EscapeResult r;
      r.a = p;
      r.achieved = stay;
      r.delta = delta;
      r.Delta = Delta;
      r.L = L;
      best = r;
    }
  }
  if (!best) throw Error(ErrorKind::NotFound, "no attractor sample satisfies the escape bound; refine sampling");
  return *best;
}

void AnalysisReport::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

void AnalysisReport::set(const std::string& key, double value) { set(key, format_double(value)); }
void AnalysisReport::set(const std::string& key, long long value) { set(key, std::to_string(value)); }
void AnalysisReport::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

std::optional<std::string> AnalysisReport::get(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string AnalysisReport::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

AnalysisReport AnalysisReport::parse(const std::string& text) {
  AnalysisReport report;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Syntax, "report line without '=': " + line);
    report.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return report;
}

AnalysisReport analyze(const IfsSystem& ifs, const AnalysisOptions& options) {
  AnalysisReport report;
  report.set("system", ifs.name);
  report.set("space", std::string(to_string(ifs.space)));
  report.set("maps", static_cast<long long>(ifs.size()));

  const auto expansivity = [&](const Point& x0) {
    if (!ifs.all_total()) {
      report.set("expansivity_ok", false);
      report.set("expansivity_note", std::string("partial maps"));
      return;
    }
    const double L = inverse_expansion_bound(ifs, x0);
    report.set("expansivity_L", L);
    if (!(L > 1.0)) {
      report.set("expansivity_ok", false);
      report.set("expansivity_note", std::string("inverse maps not expansive on the window"));
      return;
    }
    const double Lt = 0.5 * (1.0 + L);
    const auto e = expansivity_check(ifs, x0, Lt, 1000, options.seed);
    const auto orbit = reverse_orbit_check(ifs, x0, Lt, e.r0, 100, 6, options.seed);
    report.set("expansivity_L_tilde", Lt);
    report.set("expansivity_rho", e.rho);
    report.set("expansivity_r0", e.r0);
    report.set("expansivity_ok", e.ok && orbit.ok);
  };

  if (ifs.space == ModelSpace::ComplexPlane2) {
    report.set("raster_metrics", std::string("skipped: complex systems are not rasterized"));
    const auto pts = chaos_game(ifs, 20000, 64, options.seed);
    double radius = 0.0;
    for (const Point& p : pts) radius = std::max(radius, distance(p, Point::complex(0.0, 0.0)));
    report.set("attractor_sample_radius", radius);
    expansivity(fixed_point(ifs, 1));
    return report;
  }

  const Grid field = grid_for(ifs, view_window(ifs), options.nx);
  const double h = field.h();
  const double eps = options.eps > 0.0 ? options.eps : h;
  report.set("nx", static_cast<long long>(field.nx));
  report.set("ny", static_cast<long long>(field.ny));
  report.set("h", h);
  report.set("K", static_cast<long long>(options.K));
  report.set("eps", eps);

  const AttractorApprox a = attractor_on(ifs, field);
  report.set("attractor_cells", static_cast<long long>(a.raster.count()));
  report.set("self_consistency", a.self_consistency);

  GenerationField field_gen;
  if (ifs.all_total()) {
    field_gen = fast_basin_inverse(ifs, a, field, options.K);
    report.set("fast_basin_algorithm", std::string("inverse"));
  } else {
    // Partial maps: forward search against the exact segment attractor.
    double lo = kInf, hi = -kInf;
    for (const MapSpec& m : ifs.maps) {
      const double tx = std::get<HalfSqrt>(m).tx;
      lo = std::min(lo, 2.0 * tx);
      hi = std::max(hi, 2.0 * tx);
    }
    const SegmentOracle oracle(Vec2{lo, 1.0}, Vec2{hi, 1.0});
    field_gen = fast_basin_forward(ifs, oracle, field, options.K, 0.0);
    for (std::size_t c = 0; c < field.cell_count(); ++c) {
      if (a.raster.test(c)) field_gen.gen[c] = 0;
    }
    report.set("fast_basin_algorithm", std::string("forward-exact"));
  }
  const CellRaster basin = field_gen.level_set(options.K);
  std::vector<long long> counts;
  for (int k = 0; k <= options.K; ++k) counts.push_back(static_cast<long long>(field_gen.count(k)));
  report.set("gen_counts", join(counts, [](long long v) { return std::to_string(v); }));
  report.set("fast_basin_cells", static_cast<long long>(basin.count()));

  try {
    const auto da = box_dimension(a.raster);
    const auto db = box_dimension(basin);
    report.set("dim_attractor", da.estimate);
    report.set("dim_fast_basin", db.estimate);
    report.set("fit_residuals", format_double(da.residual) + "," + format_double(db.residual));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateScaleRange) throw;
    report.set("dim_attractor", std::string("n/a"));
    report.set("dim_fast_basin", std::string("n/a"));
  }
  const int comps_a = connected_components(a.raster, 8);
  report.set("components_A", static_cast<long long>(comps_a));
  report.set("components_B", static_cast<long long>(connected_components(basin, 8)));
  report.set("max_solid_square_A", static_cast<long long>(max_solid_square(a.raster)));
  report.set("max_solid_square_B", static_cast<long long>(max_solid_square(basin)));

  const auto crit = criterion_check(ifs, a);
  report.set("criterion_nontrivial", crit.nontrivial);
  report.set("criterion_I", join(crit.proper, [](int i) { return std::to_string(i); }));
  report.set("per_map_hausdorff", join(crit.per_map_hausdorff, format_double));
  report.set("partial_map_caveat", crit.partial_map_caveat);

  const Box b = a.raster.occupied_bounds().value_or(field.window);
  const Point centre = field.is_line() ? Point::line(0.5 * (b.xmin + b.xmax))
                                       : Point::plane(0.5 * (b.xmin + b.xmax), 0.5 * (b.ymin + b.ymax));
  expansivity(centre);

  if (options.escape_max > 0 && ifs.space == ModelSpace::Plane2 && ifs.all_affine() && comps_a == 1) {
    const double radius = 2.0 * std::hypot(b.width(), b.height());
    std::vector<std::string> times;
    for (int n = 1; n <= options.escape_max; ++n) {
      try {
        const auto e = escape_time_demo(ifs, a, 1, centre, radius, n, options.seed);
        times.push_back(std::to_string(n) + ":" + std::to_string(e.achieved));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotFound) throw;
        times.push_back(std::to_string(n) + ":none");
      }
    }
    report.set("escape_times", join(times, [](const std::string& s) { return s; }));
  }
  return report;
}

}  // namespace fastbasin
