#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "fastbasin/analysis.hpp"
#include "fastbasin/basin.hpp"
#include "fastbasin/raster.hpp"

using namespace fastbasin;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string cfg(const std::string& name) {
  return (fs::path(FASTBASIN_SOURCE_DIR) / "configs" / (name + ".ifs")).string();
}

std::string tmp(const std::string& name) { return (fs::temp_directory_path() / ("fastbasin_cli_" + name)).string(); }

std::vector<std::uint8_t> slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli: usage and configuration errors exit 2") {
  const Result missing = run({"attractor", "--ifs", "missing.ifs"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("missing.ifs") != std::string::npos);
  CHECK(missing.err.find('\n') == missing.err.size() - 1);
  CHECK(run({}).code == 2);
  CHECK(run({"render"}).code == 2);
  CHECK(run({"attractor"}).code == 2);
  CHECK(run({"attractor", "--ifs", cfg("sierpinski"), "--nx", "100"}).code == 2);
  CHECK(run({"attractor", "--ifs", cfg("sierpinski"), "--nx", "8192"}).code == 2);
  CHECK(run({"fastbasin", "--ifs", cfg("sierpinski"), "--nx", "64", "--K", "255"}).code == 2);
  CHECK(run({"continuation", "--ifs", cfg("sierpinski"), "--nx", "64", "--word", "1,9"}).code == 2);
  CHECK(run({"attractor", "--ifs", cfg("sierpinski"), "--window", "0", "0", "1"}).code == 2);

  const std::string bad = tmp("bad.ifs");
  std::ofstream(bad) << "space plane2\nmap affine2 1 0 0\n";
  const Result syntax = run({"attractor", "--ifs", bad});
  CHECK(syntax.code == 2);
  CHECK(syntax.err.find("line 2") != std::string::npos);
}

TEST_CASE("cli: computation errors exit 1") {
  const std::string grow = tmp("grow.ifs");
  std::ofstream(grow) << "space plane2\nmap affine2 2 0 0 2 0 0\nwindow -1 -1 1 1\n";
  const Result r = run({"attractor", "--ifs", grow, "--nx", "64"});
  CHECK(r.code == 1);
  CHECK(r.err.find("NotContractive") != std::string::npos);
  CHECK(run({"fastbasin", "--ifs", cfg("halfsqrt"), "--nx", "64"}).code == 1);
}

TEST_CASE("cli: outputs are readable and deterministic") {
  const std::string fbr = tmp("a.fbr"), fbg1 = tmp("g1.fbg"), fbg4 = tmp("g4.fbg");
  const std::string ppm1 = tmp("g1.ppm"), ppm4 = tmp("g4.ppm");
  REQUIRE(run({"attractor", "--ifs", cfg("kigami"), "--nx", "128", "--out", fbr}).code == 0);
  CHECK(read_fbr1(fbr).count() > 0);
  REQUIRE(run({"fastbasin", "--ifs", cfg("kigami"), "--nx", "256", "--K", "3", "--threads", "1", "--out", fbg1,
               "--png", ppm1})
              .code == 0);
  REQUIRE(run({"fastbasin", "--ifs", cfg("kigami"), "--nx", "256", "--K", "3", "--threads", "4", "--out", fbg4,
               "--png", ppm4})
              .code == 0);
  CHECK(slurp(fbg1) == slurp(fbg4));
  CHECK(slurp(ppm1) == slurp(ppm4));
  CHECK(read_fbg1(fbg1).K == 3);

  const Result c = run({"continuation", "--ifs", cfg("ifs01"), "--nx", "128", "--word", "1,2,3"});
  CHECK(c.code == 0);
  CHECK(c.out.find("word=1,2,3") != std::string::npos);
  CHECK(run({"slowbasin", "--ifs", cfg("sierpinski"), "--nx", "128", "--K", "2"}).code == 0);
  const Result b = run({"basin", "--ifs", cfg("moebius1d"), "--nx", "512", "--K", "16"});
  CHECK(b.code == 0);
  CHECK(b.out.find("cells=304") != std::string::npos);
  const Result e = run({"escape-demo", "--ifs", cfg("sierpinski"), "--nx", "256", "--theta", "1", "--n-target", "3"});
  CHECK(e.code == 0);
  CHECK(e.out.find("achieved=") != std::string::npos);
}

TEST_CASE("cli: analyze on every shipped config") {
  for (const std::string name : {"sierpinski", "ifs01", "kigami", "fig6", "moebius1d", "halfsqrt", "parabola_c2"}) {
    CAPTURE(name);
    const Result r = run({"analyze", "--ifs", cfg(name), "--nx", "128"});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    const AnalysisReport report = AnalysisReport::parse(r.out);
    CHECK(report.get("system"));
    CHECK(report.get("expansivity_ok"));
  }
  const std::string rep = tmp("report.txt");
  REQUIRE(run({"analyze", "--ifs", cfg("sierpinski"), "--nx", "256", "--report", rep}).code == 0);
  std::ifstream in(rep);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const AnalysisReport report = AnalysisReport::parse(text);
  CHECK(std::abs(std::stod(*report.get("dim_attractor")) - 1.585) <= 0.05);
  CHECK(std::abs(std::stod(*report.get("dim_fast_basin")) - std::stod(*report.get("dim_attractor"))) <= 0.1);
}
