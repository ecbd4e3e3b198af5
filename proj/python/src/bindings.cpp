#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastbasin/analysis.hpp"
#include "fastbasin/attractor.hpp"
#include "fastbasin/basin.hpp"
#include "fastbasin/error.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/parallel.hpp"
#include "fastbasin/render.hpp"

namespace py = pybind11;
using namespace fastbasin;

namespace {

using Window = std::array<double, 4>;

Box to_box(const Window& w) { return Box{w[0], w[1], w[2], w[3]}; }
Window from_box(const Box& b) { return {b.xmin, b.ymin, b.xmax, b.ymax}; }

Grid field_for(const IfsSystem& ifs, const std::optional<Window>& window, int nx) {
  return grid_for(ifs, window ? to_box(*window) : view_window(ifs), nx);
}

// Python values for points: a float (or None for infinity) on the extended
// line, (x, y) in the plane and strip, (z, w) complex pairs in C^2.
Point to_point(const IfsSystem& ifs, const py::object& obj) {
  switch (ifs.space) {
    case ModelSpace::ExtendedLine:
      return obj.is_none() ? Point::infinity() : Point::line(obj.cast<double>());
    case ModelSpace::ComplexPlane2: {
      const auto zw = obj.cast<std::pair<std::complex<double>, std::complex<double>>>();
      return Point::complex(zw.first, zw.second);
    }
    default: {
      const auto xy = obj.cast<std::pair<double, double>>();
      return Point::plane(xy.first, xy.second);
    }
  }
}

py::object from_point(ModelSpace space, const Point& p) {
  switch (space) {
    case ModelSpace::ExtendedLine:
      return p.at_infinity ? py::none() : py::object(py::float_(p.x()));
    case ModelSpace::ComplexPlane2:
      return py::make_tuple(p.z(), p.w());
    default:
      return py::make_tuple(p.x(), p.y());
  }
}

// Row j of the array is cell row j of the grid (row 0 at ymin).
py::array_t<std::uint8_t> raster_array(const CellRaster& r) {
  py::array_t<std::uint8_t> out({r.ny(), r.nx()});
  std::memcpy(out.mutable_data(), r.bits().data(), r.bits().size());
  return out;
}

CellRaster array_raster(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a,
                        const Window& window) {
  if (a.ndim() != 2) throw py::value_error("raster arrays must be two-dimensional");
  const Grid g = Grid::square(to_box(window), static_cast<int>(a.shape(1)));
  if (g.ny != a.shape(0)) throw py::value_error("array shape does not match the window aspect ratio");
  CellRaster r(g);
  for (std::size_t k = 0; k < g.cell_count(); ++k) r.set(k, a.data()[k] != 0);
  return r;
}

py::array_t<std::uint8_t> image_array(const Image& img) {
  py::array_t<std::uint8_t> out({img.height, img.width, 3});
  std::memcpy(out.mutable_data(), img.rgb.data(), img.rgb.size());
  return out;
}

py::dict report_dict(const AnalysisReport& r) {
  py::dict d;
  for (const auto& [k, v] : r.entries) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fastbasin, m) {
  m.doc() = "Attractors, fast basins and fractal continuations of iterated function systems.";

  static py::exception<Error> error_type(m, "FastbasinError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::handle type = error_type;
      py::object err = type(std::string(to_string(e.kind())) + ": " + e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  py::class_<IfsSystem>(m, "IfsSystem")
      .def_readonly("name", &IfsSystem::name)
      .def_property_readonly("space", [](const IfsSystem& s) { return std::string(to_string(s.space)); })
      .def("__len__", &IfsSystem::size)
      .def_property_readonly("window",
                             [](const IfsSystem& s) -> std::optional<Window> {
                               if (!s.window) return std::nullopt;
                               return from_box(*s.window);
                             })
      .def_property_readonly("view_window", [](const IfsSystem& s) { return from_box(view_window(s)); })
      .def_property_readonly("attractor_window", [](const IfsSystem& s) { return from_box(attractor_window(s)); })
      .def("to_config", &to_config)
      .def(
          "apply_word",
          [](const IfsSystem& s, const std::vector<int>& word, const py::object& x) {
            return from_point(s.space, apply_word(s, Word{word}, to_point(s, x)));
          },
          py::arg("word"), py::arg("x"), "w_{t1} o ... o w_{tk}(x); the last index is applied first.")
      .def("__repr__", [](const IfsSystem& s) {
        return "<IfsSystem '" + s.name + "' " + to_string(s.space) + " N=" + std::to_string(s.size()) + ">";
      });

  m.def("load_ifs", [](const std::filesystem::path& p) { return load_ifs(p); }, py::arg("path"));
  m.def("parse_ifs", [](const std::string& text) { return parse_ifs(text); }, py::arg("text"));

  py::class_<CellRaster>(m, "Raster")
      .def_property_readonly("window", [](const CellRaster& r) { return from_box(r.grid().window); })
      .def_property_readonly("nx", &CellRaster::nx)
      .def_property_readonly("ny", &CellRaster::ny)
      .def_property_readonly("h", &CellRaster::h)
      .def("count", &CellRaster::count)
      .def("to_array", &raster_array, "uint8 array of shape (ny, nx); row 0 lies at ymin.")
      .def("image", [](const CellRaster& r) { return image_array(colorize(r)); })
      .def("write_fbr1", [](const CellRaster& r, const std::filesystem::path& p) { write_fbr1(r, p); })
      .def("subset_of", &CellRaster::subset_of)
      .def_static("from_array", &array_raster, py::arg("array"), py::arg("window"));
  m.def("read_fbr1", [](const std::filesystem::path& p) { return read_fbr1(p); });

  py::class_<AttractorApprox>(m, "Attractor")
      .def_readonly("raster", &AttractorApprox::raster)
      .def_readonly("self_consistency", &AttractorApprox::self_consistency)
      .def_readonly("iterations", &AttractorApprox::iterations);

  m.def(
      "compute_attractor",
      [](const IfsSystem& ifs, std::optional<Window> window, int nx) {
        return compute_attractor(ifs, window ? to_box(*window) : attractor_window(ifs), nx);
      },
      py::arg("ifs"), py::arg("window") = py::none(), py::arg("nx") = 512);
  m.def(
      "attractor_on",
      [](const IfsSystem& ifs, std::optional<Window> window, int nx) {
        return attractor_on(ifs, field_for(ifs, window, nx));
      },
      py::arg("ifs"), py::arg("window") = py::none(), py::arg("nx") = 512,
      "Attractor raster on the view grid (default: the config's window).");

  py::class_<GenerationField>(m, "GenerationField")
      .def_readonly("K", &GenerationField::K)
      .def_readonly("eps", &GenerationField::eps)
      .def_property_readonly("window", [](const GenerationField& f) { return from_box(f.grid.window); })
      .def_property_readonly("unset", [](const GenerationField&) { return GenerationField::kUnset; })
      .def("to_array",
           [](const GenerationField& f) {
             py::array_t<std::uint8_t> out({f.grid.ny, f.grid.nx});
             std::memcpy(out.mutable_data(), f.gen.data(), f.gen.size());
             return out;
           },
           "uint8 generations of shape (ny, nx), 255 where unset; row 0 lies at ymin.")
      .def("level_set", &GenerationField::level_set)
      .def("count", &GenerationField::count)
      .def("image", [](const GenerationField& f) { return image_array(colorize(f)); })
      .def("write_fbg1", [](const GenerationField& f, const std::filesystem::path& p) { write_fbg1(f, p); })
      .def("write_ppm", [](const GenerationField& f, const std::filesystem::path& p) { write_ppm(colorize(f), p); });
  m.def("read_fbg1", [](const std::filesystem::path& p) { return read_fbg1(p); });

  m.def(
      "fast_basin",
      [](const IfsSystem& ifs, std::optional<Window> window, int nx, int K) {
        py::gil_scoped_release release;
        const Grid field = field_for(ifs, window, nx);
        return fast_basin_inverse(ifs, attractor_on(ifs, field), field, K);
      },
      py::arg("ifs"), py::arg("window") = py::none(), py::arg("nx") = 512, py::arg("K") = 4);
  m.def(
      "continuation",
      [](const IfsSystem& ifs, const std::vector<int>& word, std::optional<Window> window, int nx) {
        const Grid field = field_for(ifs, window, nx);
        return continuation(ifs, Word{word}, attractor_on(ifs, field), field).stages;
      },
      py::arg("ifs"), py::arg("word"), py::arg("window") = py::none(), py::arg("nx") = 512);
  m.def(
      "slow_basin",
      [](const IfsSystem& ifs, std::optional<double> r, std::optional<Window> window, int nx, int K) {
        const Grid field = field_for(ifs, window, nx);
        return slow_basin(ifs, attractor_on(ifs, field), r.value_or(4.0 * field.h()), field, K);
      },
      py::arg("ifs"), py::arg("r") = py::none(), py::arg("window") = py::none(), py::arg("nx") = 512,
      py::arg("K") = 4);
  m.def(
      "basin_estimate",
      [](const IfsSystem& ifs, std::optional<double> eps, std::optional<Window> window, int nx, int K) {
        const Grid field = field_for(ifs, window, nx);
        return basin_estimate(ifs, attractor_on(ifs, field), field, K, eps.value_or(field.h()));
      },
      py::arg("ifs"), py::arg("eps") = py::none(), py::arg("window") = py::none(), py::arg("nx") = 512,
      py::arg("K") = 4);

  py::class_<AttractorOracle, std::shared_ptr<AttractorOracle>>(m, "AttractorOracle")
      .def("distance", [](const AttractorOracle& o, double x, double y) { return o.distance(Point::plane(x, y)); });
  py::class_<AffineAttractorOracle, AttractorOracle, std::shared_ptr<AffineAttractorOracle>>(m,
                                                                                               "AffineAttractorOracle")
      .def(py::init<const IfsSystem&, double>(), py::arg("ifs"), py::arg("tol") = 1e-9);
  py::class_<RasterOracle, AttractorOracle, std::shared_ptr<RasterOracle>>(m, "RasterOracle")
      .def(py::init<const CellRaster&>(), py::arg("raster"));
  py::class_<IntervalOracle, AttractorOracle, std::shared_ptr<IntervalOracle>>(m, "IntervalOracle")
      .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"));
  py::class_<SegmentOracle, AttractorOracle, std::shared_ptr<SegmentOracle>>(m, "SegmentOracle")
      .def(py::init([](std::pair<double, double> a, std::pair<double, double> b) {
             return std::make_shared<SegmentOracle>(Vec2{a.first, a.second}, Vec2{b.first, b.second});
           }),
           py::arg("a"), py::arg("b"));
  py::class_<ParabolaOracle, AttractorOracle, std::shared_ptr<ParabolaOracle>>(m, "ParabolaOracle")
      .def(py::init<double>(), py::arg("half_side") = 1.0);

  m.def(
      "generation_forward",
      [](const IfsSystem& ifs, const py::object& x, const AttractorOracle& oracle, int K, double eps,
         bool field_frame) {
        return generation_forward(ifs, to_point(ifs, x), oracle, K, eps,
                                  field_frame ? ToleranceFrame::Field : ToleranceFrame::Attractor);
      },
      py::arg("ifs"), py::arg("x"), py::arg("oracle"), py::arg("K") = 4, py::arg("eps") = 0.0,
      py::arg("field_frame") = false, "Least k <= K with some length-k word mapping x within eps of A, or None.");

  m.def(
      "box_dimension",
      [](const CellRaster& r, std::optional<int> coarsest, std::optional<int> finest) {
        const DimensionEstimate d =
            coarsest && finest ? box_dimension(r, *coarsest, *finest) : box_dimension(r);
        return py::make_tuple(d.estimate, d.residual);
      },
      py::arg("raster"), py::arg("coarsest") = py::none(), py::arg("finest") = py::none());
  m.def("connected_components", &connected_components, py::arg("raster"), py::arg("adjacency") = 8);
  m.def("max_solid_square", &max_solid_square, py::arg("raster"));
  m.def(
      "criterion_check",
      [](const IfsSystem& ifs, const AttractorApprox& a) {
        const CriterionResult c = criterion_check(ifs, a);
        py::dict d;
        d["nontrivial"] = c.nontrivial;
        d["proper"] = c.proper;
        d["per_map_hausdorff"] = c.per_map_hausdorff;
        d["partial_map_caveat"] = c.partial_map_caveat;
        d["tol"] = c.tol;
        return d;
      },
      py::arg("ifs"), py::arg("attractor"));
  m.def(
      "expansivity_check",
      [](const IfsSystem& ifs, const py::object& x0, double L_tilde, std::size_t samples, std::uint64_t seed) {
        const ExpansivityResult e = expansivity_check(ifs, to_point(ifs, x0), L_tilde, samples, seed);
        py::dict d;
        d["ok"] = e.ok;
        d["L"] = e.L;
        d["rho"] = e.rho;
        d["r0"] = e.r0;
        d["checked"] = e.checked;
        d["failures"] = e.failures;
        return d;
      },
      py::arg("ifs"), py::arg("x0"), py::arg("L_tilde"), py::arg("samples") = 10000, py::arg("seed") = 1);
  m.def(
      "analyze",
      [](const IfsSystem& ifs, int nx, int K, double eps, std::uint64_t seed) {
        AnalysisOptions o;
        o.nx = nx;
        o.K = K;
        o.eps = eps;
        o.seed = seed;
        AnalysisReport r;
        {
          py::gil_scoped_release release;
          r = analyze(ifs, o);
        }
        return report_dict(r);
      },
      py::arg("ifs"), py::arg("nx") = 512, py::arg("K") = 4, py::arg("eps") = 0.0, py::arg("seed") = 1);

  m.def("set_max_threads", &set_max_threads, py::arg("count"));
  m.def("png_available", &png_available);
}
