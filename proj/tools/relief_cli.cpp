// relief: replay, benchmark and pyramid tooling for depth-grid haptic rendering.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relief/asset_io.hpp"
#include "relief/errors.hpp"
#include "relief/fixtures.hpp"
#include "relief/replay_harness.hpp"
#include "relief/scale_pyramid.hpp"
#include "relief/workspace_mapper.hpp"

namespace fs = std::filesystem;
using namespace relief;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct FieldOptions {
  std::string field;
  std::optional<std::size_t> level;
  std::string window;  // x,y,w,h
  double workspace = kDefaultWorkspaceExtent;
};

struct RenderOptions {
  double k = RenderParams{}.stiffness_k;
  double delta_n = RenderParams{}.delta_n;
  double eps_converge = RenderParams{}.eps_converge;
  int max_iters = RenderParams{}.max_iters;

  RenderParams params() const {
    RenderParams p;
    p.stiffness_k = k;
    p.delta_n = delta_n;
    p.eps_converge = eps_converge;
    p.max_iters = max_iters;
    p.validate();
    return p;
  }
};

void add_field_options(CLI::App* cmd, FieldOptions& o) {
  cmd->add_option("--field", o.field, "depth grid (.mhdf or .csv)")->required();
  cmd->add_option("--level", o.level, "pyramid level to load into the workspace");
  cmd->add_option("--window", o.window, "ROI as x,y,w,h in level nodes (default: centred 200x200)");
  cmd->add_option("--workspace", o.workspace, "workspace cube edge in mm");
}

void add_render_options(CLI::App* cmd, RenderOptions& o) {
  cmd->add_option("--k", o.k, "spring stiffness N/mm");
  cmd->add_option("--delta-n", o.delta_n, "proxy step along the normal, mm");
  cmd->add_option("--eps-converge", o.eps_converge, "proxy convergence tolerance, mm");
  cmd->add_option("--max-iters", o.max_iters, "proxy iterations per tick");
}

RoiSelection parse_window(const std::string& text, std::size_t level) {
  std::vector<std::size_t> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(part, &used);
      if (used != part.size() || n < 0) throw std::invalid_argument(part);
      v.push_back(static_cast<std::size_t>(n));
    } catch (const std::exception&) {
      throw ValidationError("--window expects x,y,w,h as non-negative integers");
    }
  }
  if (v.size() != 4) throw ValidationError("--window expects x,y,w,h");
  return RoiSelection{level, v[0], v[1], v[2], v[3]};
}

// The field the engine sees: the grid as-is, or a workspace-mapped ROI.
DepthField resolve_field(const FieldOptions& o) {
  DepthField field = load_depth_grid(o.field);
  if (!field.is_filled()) field = fill_holes(field);
  if (!o.level) {
    if (!o.window.empty()) throw ValidationError("--window needs --level");
    return field;
  }
  const DepthPyramid pyramid = build_pyramid(field, *o.level + 1);
  RoiSelection sel;
  if (o.window.empty()) {
    const DepthField& lv = pyramid.level(*o.level);
    sel = centered_window(pyramid, *o.level, Vec2(lv.extent_x() / 2, lv.extent_y() / 2),
                          kDefaultRoiNodes, kDefaultRoiNodes);
  } else {
    sel = parse_window(o.window, *o.level);
  }
  return *load_roi(pyramid, sel, o.workspace).field;
}

int cmd_run(const FieldOptions& fo, const RenderOptions& ro, const std::string& trajectory,
            const std::string& out, bool record_timing) {
  const DepthField field = resolve_field(fo);
  const Trajectory tr = read_trajectory(fs::path(trajectory));
  ReplayOptions options;
  options.record_timing = record_timing;
  const ForceTrace trace = run_trajectory(field, tr, ro.params(), options);
  write_force_trace(trace, fs::path(out));
  std::size_t contact = 0;
  for (const auto& s : trace.samples) contact += s.in_contact ? 1 : 0;
  std::cout << "OK ticks=" << trace.samples.size() << " contact_ticks=" << contact
            << " out=" << out << '\n';
  return 0;
}

struct BenchLimits {
  std::optional<double> mean_us;
  std::optional<double> p99_us;
  std::optional<std::size_t> overruns;
};

int cmd_bench(const FieldOptions& fo, const RenderOptions& ro, const std::string& trajectory,
              const std::string& fixture, std::size_t ticks, std::size_t repeats,
              const BenchLimits& limits) {
  const auto start = std::chrono::steady_clock::now();
  const DepthField field = resolve_field(fo);
  Trajectory tr;
  if (!trajectory.empty()) {
    tr = read_trajectory(fs::path(trajectory));
  } else if (fixture == "contact_heavy") {
    tr = fixtures::contact_heavy(field, ticks);
  } else if (fixture == "descend_hold") {
    tr = fixtures::descend_hold(field, field.extent_x() / 2, field.extent_y() / 2);
  } else if (fixture == "free_space") {
    tr = fixtures::free_space(field, ticks);
  } else {
    throw ValidationError("unknown fixture trajectory '" + fixture + "'");
  }
  const LatencyStats stats = benchmark_latency(field, tr, ro.params(), repeats);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << format_latency(stats) << " wall_s=" << wall_s << '\n';

  int rc = 0;
  auto check = [&](const char* metric, double value, std::optional<double> limit) {
    if (limit && value > *limit) {
      std::cout << "FAIL bench metric=" << metric << " value=" << value << " limit=" << *limit
                << '\n';
      rc = kExitFail;
    }
  };
  check("mean_us", stats.mean_us, limits.mean_us);
  check("p99_us", stats.p99_us, limits.p99_us);
  if (limits.overruns) {
    check("overruns", static_cast<double>(stats.overrun_count),
          static_cast<double>(*limits.overruns));
  }
  return rc;
}

int cmd_pyramid(const std::string& field_path, std::size_t levels, const std::string& out_dir) {
  DepthField field = load_depth_grid(field_path);
  if (!field.is_filled()) field = fill_holes(field);
  const auto start = std::chrono::steady_clock::now();
  const DepthPyramid pyramid = build_pyramid(field, levels);
  const double build_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  fs::create_directories(out_dir);
  for (std::size_t l = 0; l < pyramid.size(); ++l) {
    const auto& lv = pyramid.level(l);
    const fs::path path = fs::path(out_dir) / ("level_" + std::to_string(l) + ".mhdf");
    save_depth_grid(path, lv);
    std::cout << "level=" << l << " width=" << lv.width() << " height=" << lv.height()
              << " spacing=" << format_double(lv.spacing()) << " path=" << path.string() << '\n';
  }
  std::cout << "OK levels=" << pyramid.size() << " build_ms=" << build_ms << '\n';
  return 0;
}

int cmd_check_phases(const std::string& trace_path, const RenderOptions& ro) {
  const ForceTrace trace = read_force_trace(fs::path(trace_path));
  const PhaseReport report = check_phases(trace, ro.params());
  std::cout << format_phase_report(report, trace) << '\n';
  return report.passed() ? 0 : kExitFail;
}

int cmd_make_fixtures(const std::string& out_dir, std::size_t nodes) {
  using fixtures::FieldKind;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  for (auto kind : {FieldKind::kFlat, FieldKind::kRamp, FieldKind::kParaboloid,
                    FieldKind::kSphereCap, FieldKind::kSine, FieldKind::kHoled,
                    FieldKind::kRelief}) {
    const std::string name(fixtures::name(kind));
    const DepthField field = fixtures::make_field(kind, nodes);
    save_depth_grid(dir / (name + ".mhdf"), field);
    const double cx = field.extent_x() / 2, cy = field.extent_y() / 2;
    write_trajectory(fixtures::free_space(field), dir / (name + "_free_space.csv"));
    write_trajectory(fixtures::descend_hold(field, 0.4 * field.extent_x(), 0.45 * field.extent_y()),
                     dir / (name + "_descend_hold.csv"));
    write_trajectory(fixtures::curved_slide(field, 0.3 * field.extent_x(), cy, 0.4 * field.extent_x()),
                     dir / (name + "_curved_slide.csv"));
    write_trajectory(fixtures::contact_heavy(field), dir / (name + "_contact_heavy.csv"));
    std::cout << "field=" << name << " nodes=" << nodes << " centre=" << cx << ',' << cy << '\n';
  }
  std::cout << "OK out_dir=" << out_dir << '\n';
  return 0;
}

int cmd_rasterize(const std::string& points, std::size_t width, std::size_t height, double spacing,
                  bool fill, const std::string& out) {
  const auto cloud = load_point_cloud(points);
  DepthField field = rasterize_point_cloud(cloud, width, height, spacing);
  const std::size_t holes = field.hole_count();
  if (fill && holes > 0) field = fill_holes(field);
  save_depth_grid(out, field);
  std::cout << "OK points=" << cloud.size() << " holes=" << holes << " out=" << out << '\n';
  return 0;
}

std::string error_code(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const SelectionError*>(&e)) return "invalid_roi";
  if (dynamic_cast<const ValidationError*>(&e)) return "invalid_input";
  if (dynamic_cast<const SizeError*>(&e)) return "size_error";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  return "io_error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-grid haptic rendering: replay, benchmark, pyramid tools"};
  app.require_subcommand(1);

  FieldOptions fo;
  RenderOptions ro;
  std::string trajectory, out, fixture = "contact_heavy", out_dir, trace, points;
  bool record_timing = false, fill = false;
  std::size_t repeats = 5, ticks = 10000, levels = 3, nodes = 201, width = 0, height = 0;
  double spacing = 1.0;
  BenchLimits limits;

  auto* run = app.add_subcommand("run", "replay a trajectory and write a force trace");
  add_field_options(run, fo);
  add_render_options(run, ro);
  run->add_option("--trajectory", trajectory, "t_ms,x_mm,y_mm,z_mm CSV")->required();
  run->add_option("--out", out, "force trace CSV")->required();
  run->add_flag("--record-timing", record_timing, "store measured tick durations");

  auto* bench = app.add_subcommand("bench", "measure per-tick latency");
  add_field_options(bench, fo);
  add_render_options(bench, ro);
  bench->add_option("--trajectory", trajectory, "trajectory CSV (default: a fixture)");
  bench->add_option("--fixture", fixture, "contact_heavy, descend_hold or free_space");
  bench->add_option("--ticks", ticks, "fixture length");
  bench->add_option("--repeats", repeats, "timed passes after one warm-up")->check(CLI::PositiveNumber);
  bench->add_option("--max-mean-us", limits.mean_us);
  bench->add_option("--max-p99-us", limits.p99_us);
  bench->add_option("--max-overruns", limits.overruns);

  auto* pyr = app.add_subcommand("pyramid", "build a Gaussian pyramid and save each level");
  std::string pyr_field;
  pyr->add_option("--field", pyr_field)->required();
  pyr->add_option("--levels", levels)->required()->check(CLI::PositiveNumber);
  pyr->add_option("--out-dir", out_dir)->required();

  auto* phases = app.add_subcommand("check-phases", "verify free / contact / hold phases of a trace");
  phases->add_option("--trace", trace)->required();
  add_render_options(phases, ro);

  auto* make = app.add_subcommand("make-fixtures", "write the synthetic fields and trajectories");
  make->add_option("--out-dir", out_dir)->required();
  make->add_option("--nodes", nodes)->check(CLI::Range(5, 4000));

  auto* raster = app.add_subcommand("rasterize", "bin a point cloud onto a grid");
  raster->add_option("--points", points)->required();
  raster->add_option("--width", width)->required();
  raster->add_option("--height", height)->required();
  raster->add_option("--spacing", spacing)->required();
  raster->add_option("--out", out)->required();
  raster->add_flag("--fill", fill, "fill empty cells with the maximum depth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(fo, ro, trajectory, out, record_timing);
    if (*bench) return cmd_bench(fo, ro, trajectory, fixture, ticks, repeats, limits);
    if (*pyr) return cmd_pyramid(pyr_field, levels, out_dir);
    if (*phases) return cmd_check_phases(trace, ro);
    if (*make) return cmd_make_fixtures(out_dir, nodes);
    if (*raster) return cmd_rasterize(points, width, height, spacing, fill, out);
  } catch (const ParseError& e) {
    std::cout << "ERROR code=parse_error location=" << e.location() << " message=" << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cout << "ERROR code=" << error_code(e) << " message=" << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
