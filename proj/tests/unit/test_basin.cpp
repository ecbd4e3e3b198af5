#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

#include "doctest.h"
#include "fastbasin/attractor.hpp"
#include "fastbasin/basin.hpp"
#include "fastbasin/error.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/transport.hpp"

using namespace fastbasin;
namespace fs = std::filesystem;

namespace {

IfsSystem config(const std::string& name) {
  return load_ifs(fs::path(FASTBASIN_SOURCE_DIR) / "configs" / (name + ".ifs"));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

struct Setup {
  IfsSystem ifs;
  Grid field;
  AttractorApprox a;
};

Setup setup(const std::string& name, int nx) {
  Setup s{config(name), {}, {}};
  s.field = grid_for(s.ifs, view_window(s.ifs), nx);
  s.a = attractor_on(s.ifs, s.field);
  return s;
}

}  // namespace

TEST_CASE("generation field invariants") {
  for (const std::string name : {"sierpinski", "ifs01", "kigami", "fig6", "moebius1d"}) {
    CAPTURE(name);
    const Setup s = setup(name, 256);
    const GenerationField zero = fast_basin_inverse(s.ifs, s.a, s.field, 0);
    CHECK(zero.level_set(0) == s.a.raster);
    CHECK(zero.count(0) == s.a.raster.count());

    const GenerationField f = fast_basin_inverse(s.ifs, s.a, s.field, 4);
    CHECK(f.eps == 0.0);
    CHECK(f.level_set(0) == s.a.raster);
    for (int k = 0; k < 4; ++k) CHECK(f.level_set(k).subset_of(f.level_set(k + 1)));
    std::size_t total = 0;
    for (int k = 0; k <= 4; ++k) total += f.count(k);
    CHECK(total == f.level_set(4).count());
  }
}

TEST_CASE("Sierpinski: (1.5, 0.5) has generation 1") {
  const Setup s = setup("sierpinski", 256);
  const GenerationField f = fast_basin_inverse(s.ifs, s.a, s.field, 3);
  // The point is a cell corner; the closed cells around it see generation 1
  // and none of them is in A.
  const auto c = s.field.locate(1.5, 0.5);
  REQUIRE(c);
  int ones = 0;
  for (int dj = -1; dj <= 0; ++dj) {
    for (int di = -1; di <= 0; ++di) {
      const auto g = f.at(c->first + di, c->second + dj);
      CHECK(g != 0);
      if (g == 1) ++ones;
    }
  }
  CHECK(ones >= 1);
  // f1(1.5, 0.5) = (0.75, 0.25) lies on the hypotenuse.
  const Point y = fastbasin::apply(s.ifs.map(1), Point::plane(1.5, 0.5));
  CHECK(gasket_member(y.x(), y.y()));
}

TEST_CASE("quarter-turn system bands on the -6.2..6.3 window") {
  const IfsSystem ifs = config("ifs01");
  const Grid field = Grid::square(Box{-6.2, -6.2, 6.3, 6.3}, 512);
  const AttractorApprox a = attractor_on(ifs, field);
  const GenerationField sweep = fast_basin_stepwise(ifs, a, field, 4);
  const GenerationField refined = fast_basin_inverse(ifs, a, field, 4);
  // The fat stepwise sweep shows every band; the cell-accurate pull-back is
  // contained in it level by level.
  for (int k = 1; k <= 4; ++k) CHECK(sweep.count(k) > 0);
  for (int k = 0; k <= 4; ++k) CHECK(refined.level_set(k).subset_of(sweep.level_set(k)));
  for (int k = 1; k <= 3; ++k) CHECK(refined.count(k) > 0);
  // Generation-4 points sit outside this window: every w_u^-1(A) with |u| = 4
  // that meets the window is already covered by shorter words.
  CHECK(refined.count(4) == 0);
}

TEST_CASE("refined pull-back against the forward search") {
  const Setup s = setup("sierpinski", 128);
  const double h = s.field.h();
  const GenerationField inv = fast_basin_inverse(s.ifs, s.a, s.field, 3);
  const AffineAttractorOracle oracle(s.ifs, 1e-3 * h);
  const GenerationField fwd = fast_basin_forward(s.ifs, oracle, s.field, 3, 0.49 * h, ToleranceFrame::Field);
  // Every forward hit lies in the closed cell set found by inverse transport.
  for (std::size_t c = 0; c < s.field.cell_count(); ++c) {
    if (fwd.gen[c] != GenerationField::kUnset) {
      CHECK(inv.gen[c] != GenerationField::kUnset);
      CHECK(inv.gen[c] <= fwd.gen[c]);
    }
  }
}

TEST_CASE("fast basin extent holds the field") {
  const Setup s = setup("kigami", 128);
  const Box box = *s.a.raster.occupied_bounds();
  const Box ext = fast_basin_extent(s.ifs, box, 3);
  CHECK(ext.contains(box));
  const Grid wide = Grid::square(Box{ext.xmin - 1, ext.ymin - 1, ext.xmin - 1 + 2 * (ext.width() + 2),
                                     ext.ymin - 1 + 2 * (ext.width() + 2)},
                                 128);
  const AttractorApprox a = attractor_on(s.ifs, wide);
  const CellRaster b = fast_basin_inverse(s.ifs, a, wide, 3).level_set(3);
  const Box occupied = *b.occupied_bounds();
  const double h = wide.h();
  CHECK(occupied.xmin >= ext.xmin - h);
  CHECK(occupied.xmax <= ext.xmax + h);
  CHECK(occupied.ymin >= ext.ymin - h);
  CHECK(occupied.ymax <= ext.ymax + h);
}

TEST_CASE("FBG1 round trip") {
  const Setup s = setup("fig6", 64);
  const GenerationField f = fast_basin_inverse(s.ifs, s.a, s.field, 4);
  const auto bytes = encode_fbg1(f);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FBG1");
  CHECK(bytes.size() == 4 + 8 + 32 + s.field.cell_count());
  const GenerationField back = decode_fbg1(bytes);
  CHECK(back.gen == f.gen);
  CHECK(back.grid == f.grid);
  const fs::path path = fs::temp_directory_path() / "fastbasin_unit_field.fbg";
  write_fbg1(f, path);
  CHECK(read_fbg1(path).gen == f.gen);
  CHECK(kind_of([&] { fast_basin_inverse(s.ifs, s.a, s.field, 255); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("partial maps need the forward search") {
  const IfsSystem hs = config("halfsqrt");
  const Grid field = grid_for(hs, view_window(hs), 64);
  const AttractorApprox a = attractor_on(hs, field);
  CHECK(kind_of([&] { fast_basin_inverse(hs, a, field, 2); }) == ErrorKind::PartialMapsUnsupported);
  CHECK(kind_of([&] { slow_basin(hs, a, 0.1, field, 2); }) == ErrorKind::PartialMapsUnsupported);
  CHECK(kind_of([&] { continuation(hs, Word{{1}}, a, field); }) == ErrorKind::PartialMapsUnsupported);

  const SegmentOracle segment(Vec2{0.0, 1.0}, Vec2{1.0, 1.0});
  CHECK(generation_forward(hs, Point::plane(0.3, 1.0), segment, 12, 0.0) == 0);
  CHECK_FALSE(generation_forward(hs, Point::plane(0.5, 2.0), segment, 12, 0.0));
  CHECK_FALSE(generation_forward(hs, Point::plane(0.9, 0.7), segment, 12, 0.0));
}

TEST_CASE("forward search on the extended line") {
  const IfsSystem m = config("moebius1d");
  const IntervalOracle unit(0.0, 1.0);
  CHECK(generation_forward(m, Point::line(0.5), unit, 8, 0.0) == 0);
  CHECK(generation_forward(m, Point::line(6.0), unit, 8, 0.0) == 2);
  CHECK(generation_forward(m, Point::line(1.6), unit, 8, 0.0) == 1);
  CHECK(generation_forward(m, Point::line(-1.5), unit, 8, 0.0) == 1);
  // w2(infinity) = -1/2 and w2(-1/2) = 5/14.
  CHECK(generation_forward(m, Point::infinity(), unit, 8, 0.0) == 2);
}

TEST_CASE("Bellman consistency on the line") {
  const IfsSystem m = config("moebius1d");
  const IntervalOracle unit(0.0, 1.0);
  int checked = 0;
  for (std::uint64_t k = 0; k < 400; ++k) {
    const double x = -40.0 + 80.0 * counter_uniform(21, k);
    const auto g = generation_forward(m, Point::line(x), unit, 8, 0.0);
    std::optional<int> best;
    for (int i = 1; i <= 2; ++i) {
      const auto gi = generation_forward(m, fastbasin::apply(m.map(i), Point::line(x)), unit, 7, 0.0);
      if (gi && (!best || *gi < *best)) best = gi;
    }
    if (g && *g >= 1) {
      REQUIRE(best);
      CHECK(*g == 1 + *best);
      ++checked;
    } else if (!g) {
      CHECK_FALSE(best);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("Bellman consistency in the plane") {
  const Setup s = setup("kigami", 256);
  const RasterOracle oracle(s.a.raster);
  const double eps = s.field.h();
  const Box w = s.field.window;
  int checked = 0;
  for (std::uint64_t k = 0; k < 300; ++k) {
    const Point x = Point::plane(w.xmin + w.width() * counter_uniform(31, 2 * k),
                                 w.ymin + w.height() * counter_uniform(31, 2 * k + 1));
    const auto g = generation_forward(s.ifs, x, oracle, 4, eps);
    std::optional<int> best;
    for (int i = 1; i <= 3; ++i) {
      const auto gi = generation_forward(s.ifs, fastbasin::apply(s.ifs.map(i), x), oracle, 3, eps);
      if (gi && (!best || *gi < *best)) best = gi;
    }
    if (g && *g >= 1) {
      REQUIRE(best);
      CHECK(std::abs(*g - (1 + *best)) <= 1);
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("attractor oracle built from the maps") {
  const IfsSystem s = config("sierpinski");
  const AffineAttractorOracle oracle(s, 1e-6);
  CHECK(oracle.contains(Point::plane(0.5, 0.5), 1e-9));
  CHECK(oracle.contains(Point::plane(0.75, 0.25), 1e-9));
  CHECK(oracle.distance(Point::plane(0.4, 0.4)) == doctest::Approx(0.1).epsilon(1e-4));
  CHECK(oracle.distance(Point::plane(2.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_FALSE(oracle.contains(Point::plane(0.4, 0.4), 0.09));
  CHECK(oracle.contains(Point::plane(0.4, 0.4), 0.11));
  CHECK(generation_forward(s, Point::plane(0.5, 0.5), oracle, 4, 0.0) == 0);
  CHECK(generation_forward(s, Point::plane(1.5, 0.5), oracle, 4, 0.0) == 1);

  const Setup r = setup("sierpinski", 256);
  const RasterOracle raster(r.a.raster);
  CHECK(raster.distance(Point::plane(0.5, 0.5)) == 0.0);
  CHECK(raster.distance(Point::plane(0.4, 0.4)) <= 0.1);
  CHECK(raster.distance(Point::plane(0.4, 0.4)) >= 0.1 - 2 * r.field.h());
}

TEST_CASE("continuation") {
  const Setup s = setup("sierpinski", 256);
  const ContinuationApprox empty = continuation(s.ifs, Word{}, s.a, s.field);
  REQUIRE(empty.stages.size() == 1);
  CHECK(empty.stages[0] == s.a.raster);

  // Along (1, 1) stage 2 is 4A, since f1^-1 doubles about the origin.
  const ContinuationApprox c = continuation(s.ifs, Word{{1, 1}}, s.a, s.field);
  REQUIRE(c.stages.size() == 3);
  const AttractorApprox unit = compute_attractor(s.ifs, Box{0, 0, 1, 1}, 256);
  CellRaster scaled(Grid::square(Box{0, 0, 4, 4}, 256));
  scaled.bits() = unit.raster.bits();
  const CellRaster four_a = resample(scaled, s.field);
  CHECK(c.stages[2].subset_of(dilate(four_a, 1)));
  CHECK(four_a.subset_of(dilate(c.stages[2], 1)));

  const Setup q = setup("ifs01", 256);
  for (std::uint64_t t = 0; t < 5; ++t) {
    Word w;
    for (int k = 0; k < 4; ++k) w.indices.push_back(1 + static_cast<int>(counter_hash(40 + t, k) % 3));
    CAPTURE(to_string(w));
    const ContinuationApprox cw = continuation(q.ifs, w, q.a, q.field);
    REQUIRE(cw.stages.size() == 5);
    CHECK(cw.stages[0] == q.a.raster);
    for (int k = 0; k < 4; ++k) CHECK(cw.stages[k].subset_of(dilate(cw.stages[k + 1], 1)));
  }
}

TEST_CASE("continuations lie in the fast basin; restricted alphabet recovers it") {
  const Setup s = setup("sierpinski", 256);
  const CellRaster b = fast_basin_inverse(s.ifs, s.a, s.field, 4).level_set(4);
  const CellRaster near = dilate(b, 1);
  for (int i = 1; i <= 3; ++i) {
    const ContinuationApprox c = continuation(s.ifs, Word{{i, i, i, i}}, s.a, s.field);
    CHECK(c.stages.back().subset_of(near));
  }
  CellRaster restricted = fast_basin_restricted(s.ifs, s.a, s.field, 4, {1, 2, 3}).level_set(4);
  restricted |= s.a.raster;
  CHECK(restricted.subset_of(near));
  CHECK(b.subset_of(dilate(restricted, 1)));
  // Dropping map 3 loses part of the basin.
  const CellRaster two = fast_basin_restricted(s.ifs, s.a, s.field, 4, {1, 2}).level_set(4);
  CHECK(two.subset_of(b));
  CHECK(two.count() < b.count());
}

TEST_CASE("slow basin") {
  const Setup s = setup("ifs01", 128);
  CHECK(kind_of([&] { slow_basin(s.ifs, s.a, 0.0, s.field, 2); }) == ErrorKind::InvalidRadius);
  const CellRaster slow = slow_basin(s.ifs, s.a, 4 * s.field.h(), s.field, 4);
  CHECK(s.a.raster.subset_of(slow));
  CHECK(fast_basin_inverse(s.ifs, s.a, s.field, 4).level_set(4).subset_of(slow));
  CHECK(basin_estimate(s.ifs, s.a, s.field, 4, s.field.h()).subset_of(slow));
}

TEST_CASE("basin estimates") {
  const IfsSystem sier = config("sierpinski");
  const Grid small = grid_for(sier, view_window(sier), 64);
  const AttractorApprox a = attractor_on(sier, small);
  CHECK(basin_estimate(sier, a, small, 8, small.h()).count() == small.cell_count());

  const IfsSystem m = config("moebius1d");
  const Grid line = grid_for(m, Box{-8, 0, 8, 0}, 512);
  const AttractorApprox am = attractor_on(m, line);
  const CellRaster est = basin_estimate(m, am, line, 16, line.h());
  for (int i = 0; i < line.nx; ++i) {
    const Box b = line.cell_box(i, 0);
    if (b.xmax <= 1.5 - line.h()) CHECK(est.test(i, 0));
    if (b.xmin >= 1.5) CHECK_FALSE(est.test(i, 0));
  }
  const CellRaster deep = basin_estimate(m, am, line, 40, line.h());
  const auto c = line.locate(1.6, 0.0);
  REQUIRE(c);
  CHECK_FALSE(deep.test(c->first, 0));
}
