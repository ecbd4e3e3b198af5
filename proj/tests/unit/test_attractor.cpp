#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fastbasin/attractor.hpp"
#include "fastbasin/error.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/raster.hpp"
#include "fastbasin/transport.hpp"

using namespace fastbasin;
namespace fs = std::filesystem;

namespace {

IfsSystem sierpinski() {
  return parse_ifs(
      "space plane2\n"
      "map affine2 0.5 0 0 0.5 0 0\n"
      "map affine2 0.5 0 0 0.5 0.5 0\n"
      "map affine2 0.5 0 0 0.5 0 0.5\n");
}

IfsSystem ifs01() { return load_ifs(fs::path(FASTBASIN_SOURCE_DIR) / "configs" / "ifs01.ifs"); }

// Cells of the unit square with a gasket point among their corners.
CellRaster gasket_raster(int n) {
  CellRaster r(Grid::square(Box{0, 0, 1, 1}, n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      bool hit = false;
      for (int dj = 0; dj <= 1 && !hit; ++dj) {
        for (int di = 0; di <= 1 && !hit; ++di) {
          hit = gasket_member(static_cast<double>(i + di) / n, static_cast<double>(j + dj) / n);
        }
      }
      if (hit) r.set(i, j);
    }
  }
  return r;
}

}  // namespace

TEST_CASE("gasket membership") {
  CHECK(gasket_member(0.5, 0.5));
  CHECK_FALSE(gasket_member(0.4, 0.4));
  CHECK_FALSE(gasket_member(0.5, 0.75));
  CHECK(gasket_member(0.0, 0.0));
  CHECK(gasket_member(1.0, 0.0));
  CHECK(gasket_member(0.25, 0.75));
  CHECK(gasket_member(0.75, 0.125));
  CHECK_FALSE(gasket_member(0.375, 0.375));
  // Every point of the hypotenuse and of the legs is in the gasket.
  for (int k = 0; k <= 64; ++k) {
    CHECK(gasket_member(k / 64.0, 1.0 - k / 64.0));
    CHECK(gasket_member(k / 64.0, 0.0));
  }
  const Dyadic d = Dyadic::from_double(0.375);
  CHECK(std::ldexp(static_cast<double>(d.num), -d.exp) == 0.375);
  CHECK_THROWS_AS(Dyadic::from_double(1.5), Error);
}

TEST_CASE("grid geometry") {
  const Grid g = Grid::square(Box{-1, 0, 3, 2}, 8);
  CHECK(g.ny == 4);
  CHECK(g.h() == 0.5);
  CHECK(g.cell_box(1, 2) == Box{-0.5, 1.0, 0.0, 1.5});
  const auto c = g.locate(2.9, 1.9);
  REQUIRE(c);
  CHECK(c->first == 7);
  CHECK(c->second == 3);
  CHECK_FALSE(g.locate(3.5, 1.0));
  const Grid l = Grid::line(-8, 8, 16);
  CHECK(l.is_line());
  CHECK_THROWS_AS((Grid{Box{0, 0, 1, 1}, 4, 3}.validate()), Error);
}

TEST_CASE("FBR1 round trip and layout") {
  CellRaster r(Grid::square(Box{-1.5, 0.25, 2.5, 4.25}, 10));
  r.set(0, 0);
  r.set(9, 9);
  r.set(3, 7);
  const auto bytes = encode_fbr1(r);
  REQUIRE(bytes.size() == 4 + 8 + 32 + (100 + 7) / 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FBR1");
  CHECK(bytes[4] == 10);
  CHECK(bytes[5] == 0);
  CHECK(bytes[44] == 0x80);  // cell (0, 0) is the high bit of the first byte
  CHECK(decode_fbr1(bytes) == r);
  const fs::path path = fs::temp_directory_path() / "fastbasin_unit_roundtrip.fbr";
  write_fbr1(r, path);
  CHECK(read_fbr1(path) == r);
  std::vector<std::uint8_t> bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_fbr1(bad), Error);
  bad = bytes;
  bad.pop_back();
  CHECK_THROWS_AS(decode_fbr1(bad), Error);
}

TEST_CASE("dilation and Hausdorff distance") {
  CellRaster a(Grid::square(Box{0, 0, 1, 1}, 16));
  a.set(5, 5);
  const CellRaster d = dilate(a, 2);
  CHECK(d.count() == 25);
  CellRaster b(a.grid());
  b.set(8, 5);
  CHECK(hausdorff_distance(a, b) == doctest::Approx(3.0 / 16.0));
  CHECK(hausdorff_distance(a, a) == 0.0);

  // Symmetry and the triangle inequality on random rasters.
  for (std::uint64_t t = 0; t < 20; ++t) {
    CellRaster r[3] = {CellRaster(a.grid()), CellRaster(a.grid()), CellRaster(a.grid())};
    for (int s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < a.grid().cell_count(); ++c) {
        if (counter_uniform(100 * t + s, c) < 0.03) r[s].set(c);
      }
      r[s].set(static_cast<std::size_t>(counter_hash(t, s) % a.grid().cell_count()));
    }
    const double ab = hausdorff_distance(r[0], r[1]);
    CHECK(ab == doctest::Approx(hausdorff_distance(r[1], r[0])));
    CHECK(ab <= hausdorff_distance(r[0], r[2]) + hausdorff_distance(r[2], r[1]) + 1e-12);
  }
}

TEST_CASE("cover primitives use positive overlap") {
  CellRaster line(Grid::line(0, 8, 8));
  cover_interval(2.0, 4.0, line);
  CHECK(line.count() == 2);
  CHECK(line.test(2, 0));
  CHECK(line.test(3, 0));
  CellRaster sq(Grid::square(Box{0, 0, 4, 4}, 4));
  const Vec2 tri[3] = {{0.5, 0.5}, {2.5, 0.5}, {0.5, 2.5}};
  cover_convex(tri, sq);
  CHECK(sq.test(0, 0));
  CHECK(sq.test(2, 0));
  CHECK(sq.test(1, 1));
  CHECK_FALSE(sq.test(2, 2));
}

TEST_CASE("transport: identity, scaling and declared geometry") {
  const IfsSystem s = sierpinski();
  const AttractorApprox a = compute_attractor(s, Box{0, 0, 1, 1}, 256);
  CHECK(transport_raster(Affine2{}, Direction::Forward, a.raster, a.raster.grid()) == a.raster);

  // f1^-1 doubles; on a grid with doubled cells the occupancy is unchanged.
  const Grid big = Grid::square(Box{0, 0, 2, 2}, 256);
  const CellRaster doubled = transport_raster(s.map(1), Direction::Inverse, a.raster, big);
  CellRaster relabelled(big);
  relabelled.bits() = a.raster.bits();
  CHECK(doubled.subset_of(dilate(relabelled, 1)));
  CHECK(relabelled.subset_of(dilate(doubled, 1)));

  const IfsSystem q = ifs01();
  const Grid fig = Grid::square(Box{-6.2, -6.2, 6.3, 6.3}, 512);
  const AttractorApprox aq = attractor_on(q, fig);
  for (int i = 1; i <= 3; ++i) {
    CHECK(transport_raster(q.map(i), Direction::Inverse, aq.raster, fig).grid() == fig);
  }
}

TEST_CASE("transport is monotone and an outer approximation") {
  const IfsSystem q = ifs01();
  const Grid g = Grid::square(Box{-2, -2, 2, 2}, 128);
  CellRaster small(g), large(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const double u = counter_uniform(7, c);
    if (u < 0.02) small.set(c);
    if (u < 0.05) large.set(c);
  }
  for (int i = 1; i <= 3; ++i) {
    for (const Direction dir : {Direction::Forward, Direction::Inverse}) {
      const CellRaster rs = transport_raster(q.map(i), dir, small, g);
      const CellRaster rl = transport_raster(q.map(i), dir, large, g);
      CHECK(rs.subset_of(rl));
    }
  }
  const auto cells = occupied_cells(small);
  for (int i = 1; i <= 3; ++i) {
    const CellRaster img = transport_raster(q.map(i), Direction::Inverse, small, g);
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const std::size_t c = cells[counter_hash(i, k) % cells.size()];
      const int ci = static_cast<int>(c % g.nx), cj = static_cast<int>(c / g.nx);
      const Box b = g.cell_box(ci, cj);
      const double x = b.xmin + b.width() * counter_uniform(i, 2 * k);
      const double y = b.ymin + b.height() * counter_uniform(i, 2 * k + 1);
      const Point p = apply_inverse(q.map(i), Point::plane(x, y));
      const auto hit = g.locate(p.x(), p.y());
      if (hit) CHECK(img.test(hit->first, hit->second));
    }
  }
}

TEST_CASE("attractor of x/2 is the cells at the origin") {
  const IfsSystem half = parse_ifs("map affine2 0.5 0 0 0.5 0 0\n");
  const AttractorApprox a = compute_attractor(half, Box{-1, -1, 1, 1}, 64);
  CHECK(a.raster.count() >= 1);
  CHECK(a.raster.count() <= 4);
  for (int j = 0; j < 64; ++j) {
    for (int i = 0; i < 64; ++i) {
      if (a.raster.test(i, j)) CHECK(box_distance(a.raster.grid().cell_box(i, j), 0.0, 0.0) == 0.0);
    }
  }
  const IfsSystem line = parse_ifs("space line1ext\nmap moebius1 0.5 0 0 1\n");
  const AttractorApprox al = compute_attractor(line, Box{-1, 0, 1, 0}, 64);
  CHECK(al.raster.count() <= 2);
  CHECK(al.self_consistency <= 2 * al.raster.h());
}

TEST_CASE("Sierpinski attractor agrees with the digit oracle") {
  const IfsSystem s = sierpinski();
  const AttractorApprox a = compute_attractor(s, Box{0, 0, 1, 1}, 256);
  CHECK(a.self_consistency <= 2 * a.raster.h());
  const CellRaster oracle = gasket_raster(256);
  // Outer approximation: a gasket point at a cell corner lies in some
  // occupied closed cell around it.
  const int n = 256;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (!gasket_member(static_cast<double>(i) / n, static_cast<double>(j) / n)) continue;
      bool covered = false;
      for (int dj = -1; dj <= 0; ++dj) {
        for (int di = -1; di <= 0; ++di) {
          const int ci = i + di, cj = j + dj;
          if (ci >= 0 && cj >= 0 && ci < n && cj < n && a.raster.test(ci, cj)) covered = true;
        }
      }
      CHECK(covered);
    }
  }
  // Disagreements stay in a two-cell band.
  CHECK(a.raster.subset_of(dilate(oracle, 2)));
  CHECK(oracle.subset_of(dilate(a.raster, 2)));
}

TEST_CASE("attractor invariance and refinement") {
  for (const IfsSystem& ifs : {sierpinski(), ifs01()}) {
    const Box w = attractor_window(ifs);
    const AttractorApprox coarse = compute_attractor(ifs, w, 128);
    const AttractorApprox fine = compute_attractor(ifs, w, 256);
    const CellRaster img = hutchinson_image(ifs, fine.raster, fine.raster.grid());
    CHECK(img.subset_of(dilate(fine.raster, 1)));
    CHECK(fine.raster.subset_of(dilate(img, 1)));
    CHECK(resample(fine.raster, coarse.raster.grid()).subset_of(coarse.raster));
  }
}

TEST_CASE("HalfSqrt attractor is the segment y = 1") {
  const IfsSystem hs = load_ifs(fs::path(FASTBASIN_SOURCE_DIR) / "configs" / "halfsqrt.ifs");
  const AttractorApprox a = compute_attractor(hs, attractor_window(hs), 256);
  const double h = a.raster.h();
  const Grid& g = a.raster.grid();
  int columns = 0;
  for (int i = 0; i < g.nx; ++i) {
    bool any = false;
    for (int j = 0; j < g.ny; ++j) {
      if (!a.raster.test(i, j)) continue;
      any = true;
      CHECK(box_distance(g.cell_box(i, j), g.cell_center(i, j).x, 1.0) <= h);
    }
    columns += any ? 1 : 0;
  }
  CHECK(columns == g.nx);
}

TEST_CASE("non-contractive systems are rejected") {
  const IfsSystem grow = parse_ifs("map affine2 2 0 0 2 0 0\n");
  try {
    compute_attractor(grow, Box{-1, -1, 1, 1}, 64);
    FAIL("expected NotContractive");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotContractive);
  }
}

TEST_CASE("chaos game") {
  const IfsSystem half = parse_ifs("map affine2 0.5 0 0 0.5 0 0\n");
  for (const Point& p : chaos_game(half, 100, 64, 3)) CHECK(std::hypot(p.x(), p.y()) < 1e-9);

  const IfsSystem s = sierpinski();
  const auto pts = chaos_game(s, 100000, 50, 11);
  CHECK(pts == chaos_game(s, 100000, 50, 11));
  const AttractorApprox a = compute_attractor(s, Box{0, 0, 1, 1}, 256);
  const CellRaster near = dilate(a.raster, 1);
  std::size_t inside = 0;
  for (const Point& p : pts) {
    const auto c = near.grid().locate(p.x(), p.y());
    if (c && near.test(c->first, c->second)) ++inside;
  }
  CHECK(static_cast<double>(inside) >= 0.999 * pts.size());

  const IfsSystem q = ifs01();
  const AttractorApprox aq = compute_attractor(q, attractor_window(q), 256);
  const CellRaster nq = dilate(aq.raster, 1);
  for (const Point& p : chaos_game(q, 20000, 50, 5)) {
    const auto c = nq.grid().locate(p.x(), p.y());
    REQUIRE(c);
    CHECK(nq.test(c->first, c->second));
  }
}
