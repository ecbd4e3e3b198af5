#include "cli.hpp"

#include <CLI11.hpp>

#include <bit>
#include <fstream>
#include <iostream>
#include <optional>

#include "fastbasin/analysis.hpp"
#include "fastbasin/attractor.hpp"
#include "fastbasin/basin.hpp"
#include "fastbasin/error.hpp"
#include "fastbasin/ifs.hpp"
#include "fastbasin/parallel.hpp"
#include "fastbasin/render.hpp"

namespace fastbasin::cli {

namespace {

// Raised for problems with the command line or the config file (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string ifs_path;
  std::vector<double> window;
  int nx = 512;
  int K = 4;
  double eps = 0.0;
  double r = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string png;
  std::string report;
  std::string word;
  int theta = 1;
  int n_target = 5;
  double disk_radius = 0.0;
};

struct Context {
  IfsSystem ifs;
  Grid field;
};

Context setup(const Options& o, bool raster) {
  if (o.nx < 64 || o.nx > 4096 || !std::has_single_bit(static_cast<unsigned>(o.nx))) {
    throw UsageError("--nx must be a power of two between 64 and 4096");
  }
  if (o.K < 0 || o.K > kMaxGeneration) throw UsageError("--K must be between 0 and 254");
  Context ctx;
  try {
    ctx.ifs = load_ifs(o.ifs_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!o.window.empty()) ctx.ifs.window = Box{o.window[0], o.window[1], o.window[2], o.window[3]};
  set_max_threads(o.threads);
  if (raster) ctx.field = grid_for(ctx.ifs, view_window(ctx.ifs), o.nx);
  return ctx;
}

void save_image(const Image& img, const std::string& path, std::ostream& out) {
  if (path.empty()) return;
  write_image(img, path);
  out << "image=" << path << "\n";
}

int cmd_attractor(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  out << "system=" << a.ifs_name << "\ncells=" << a.raster.count() << "\niterations=" << a.iterations
      << "\nself_consistency=" << a.self_consistency << "\n";
  if (!o.out.empty()) {
    write_fbr1(a.raster, o.out);
    out << "raster=" << o.out << "\n";
  }
  save_image(colorize(a.raster), o.png, out);
  return 0;
}

void report_field(const GenerationField& f, const Options& o, std::ostream& out) {
  for (int k = 0; k <= f.K; ++k) out << "gen_count_" << k << "=" << f.count(k) << "\n";
  if (!o.out.empty()) {
    write_fbg1(f, o.out);
    out << "field=" << o.out << "\n";
  }
  save_image(colorize(f), o.png, out);
}

int cmd_fastbasin(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  report_field(fast_basin_inverse(ctx.ifs, a, ctx.field, o.K), o, out);
  return 0;
}

int cmd_continuation(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  Word word;
  try {
    word = parse_word(o.word);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (word.size() > kMaxGeneration) throw UsageError("--word longer than 254 indices");
  for (const int i : word.indices) {
    if (i < 1 || i > static_cast<int>(ctx.ifs.size())) {
      throw UsageError("--word index " + std::to_string(i) + " outside 1.." + std::to_string(ctx.ifs.size()));
    }
  }
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  const ContinuationApprox c = continuation(ctx.ifs, word, a, ctx.field);
  // Stages are nested; a cell is labelled with the first stage containing it.
  GenerationField f(ctx.field, static_cast<int>(word.size()), 0.0);
  for (std::size_t k = c.stages.size(); k-- > 0;) {
    for (std::size_t cell = 0; cell < f.gen.size(); ++cell) {
      if (c.stages[k].test(cell)) f.gen[cell] = static_cast<std::uint8_t>(k);
    }
  }
  out << "word=" << to_string(word) << "\n";
  report_field(f, o, out);
  return 0;
}

int cmd_slowbasin(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  const double r = o.r > 0.0 ? o.r : 4.0 * ctx.field.h();
  const CellRaster s = slow_basin(ctx.ifs, a, r, ctx.field, o.K);
  out << "r=" << r << "\ncells=" << s.count() << "\n";
  if (!o.out.empty()) {
    write_fbr1(s, o.out);
    out << "raster=" << o.out << "\n";
  }
  save_image(colorize(s), o.png, out);
  return 0;
}

int cmd_basin(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  const double eps = o.eps > 0.0 ? o.eps : ctx.field.h();
  const CellRaster b = basin_estimate(ctx.ifs, a, ctx.field, o.K, eps);
  out << "eps=" << eps << "\ncells=" << b.count() << "\n";
  if (!o.out.empty()) {
    write_fbr1(b, o.out);
    out << "raster=" << o.out << "\n";
  }
  save_image(colorize(b), o.png, out);
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, false);
  AnalysisOptions opts;
  opts.nx = o.nx;
  opts.K = o.K;
  opts.eps = o.eps;
  opts.seed = o.seed;
  const std::string text = analyze(ctx.ifs, opts).to_text();
  if (o.report.empty()) {
    out << text;
  } else {
    std::ofstream f(o.report, std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + o.report + "' for writing");
    f << text;
    out << "report=" << o.report << "\n";
  }
  return 0;
}

int cmd_escape(const Options& o, std::ostream& out) {
  const Context ctx = setup(o, true);
  if (o.theta < 1 || o.theta > static_cast<int>(ctx.ifs.size())) throw UsageError("--theta out of range");
  const AttractorApprox a = attractor_on(ctx.ifs, ctx.field);
  const auto b = a.raster.occupied_bounds();
  if (!b) throw Error(ErrorKind::NotFound, "empty attractor raster");
  const Point centre = Point::plane(0.5 * (b->xmin + b->xmax), 0.5 * (b->ymin + b->ymax));
  const double radius = o.disk_radius > 0.0 ? o.disk_radius : 2.0 * std::hypot(b->width(), b->height());
  const EscapeResult e = escape_time_demo(ctx.ifs, a, o.theta, centre, radius, o.n_target, o.seed);
  out << "n_target=" << o.n_target << "\nachieved=" << e.achieved << "\na=" << to_string(e.a) << "\ndelta=" << e.delta
      << "\nDelta=" << e.Delta << "\nL=" << e.L << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attractors, fast basins and continuations of iterated function systems", "fastbasin"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&o](CLI::App* sub) {
    sub->add_option("--ifs", o.ifs_path, "IFS config file")->required();
    sub->add_option("--window", o.window, "view window: xmin ymin xmax ymax")->expected(4);
    sub->add_option("--nx", o.nx, "cells across the window (power of two, 64..4096)");
    sub->add_option("--threads", o.threads, "worker cap; 0 uses all cores");
    sub->add_option("--seed", o.seed, "seed for sampled checks");
  };
  const auto outputs = [&o](CLI::App* sub) {
    sub->add_option("--out", o.out, "FBR1/FBG1 output");
    sub->add_option("--png", o.png, "image output (PPM, or PNG by extension)");
  };

  auto* attractor = app.add_subcommand("attractor", "attractor raster");
  common(attractor);
  outputs(attractor);
  auto* fastbasin = app.add_subcommand("fastbasin", "generation field of the fast basin");
  common(fastbasin);
  outputs(fastbasin);
  fastbasin->add_option("--K", o.K, "deepest generation");
  auto* cont = app.add_subcommand("continuation", "fractal continuation along a word");
  common(cont);
  outputs(cont);
  cont->add_option("--word", o.word, "indices, e.g. 1,2,1")->required();
  auto* slow = app.add_subcommand("slowbasin", "slow basin raster");
  common(slow);
  outputs(slow);
  slow->add_option("--K", o.K, "sweeps");
  slow->add_option("--r", o.r, "seed radius; default 4 cells");
  auto* basin = app.add_subcommand("basin", "basin of attraction estimate");
  common(basin);
  outputs(basin);
  basin->add_option("--K", o.K, "iterations");
  basin->add_option("--eps", o.eps, "membership tolerance; default one cell");
  auto* an = app.add_subcommand("analyze", "metrics report");
  common(an);
  an->add_option("--K", o.K, "deepest generation");
  an->add_option("--eps", o.eps, "tolerance; default one cell");
  an->add_option("--report", o.report, "report file; default stdout");
  auto* esc = app.add_subcommand("escape-demo", "escape-time growth");
  common(esc);
  esc->add_option("--theta", o.theta, "map index theta_1");
  esc->add_option("--n-target", o.n_target, "required stay time");
  esc->add_option("--disk-radius", o.disk_radius, "disk radius; default twice the attractor diameter");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "fastbasin: " << e.what() << "\n";
    return 2;
  }

  try {
    if (attractor->parsed()) return cmd_attractor(o, out);
    if (fastbasin->parsed()) return cmd_fastbasin(o, out);
    if (cont->parsed()) return cmd_continuation(o, out);
    if (slow->parsed()) return cmd_slowbasin(o, out);
    if (basin->parsed()) return cmd_basin(o, out);
    if (an->parsed()) return cmd_analyze(o, out);
    if (esc->parsed()) return cmd_escape(o, out);
  } catch (const UsageError& e) {
    err << "fastbasin: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "fastbasin: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fastbasin::cli
