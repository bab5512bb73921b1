// Exit gate. Prints one PASS/FAIL line per criterion and exits nonzero when
// any of them fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relief/asset_io.hpp"
#include "relief/fixtures.hpp"
#include "relief/proxy_renderer.hpp"
#include "relief/replay_harness.hpp"
#include "relief/scale_pyramid.hpp"
#include "relief/surface.hpp"
#include "support/oracles.hpp"

using namespace relief;
using fixtures::FieldKind;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Result {
  bool pass = true;
  std::ostringstream detail;
};

const std::vector<FieldKind> kAllKinds = {FieldKind::kFlat,      FieldKind::kRamp,
                                          FieldKind::kParaboloid, FieldKind::kSphereCap,
                                          FieldKind::kSine,      FieldKind::kHoled,
                                          FieldKind::kRelief};

std::vector<std::pair<std::string, Trajectory>> fixture_trajectories(const DepthField& f) {
  const double L = f.extent_x();
  return {{"free_space", fixtures::free_space(f)},
          {"descend_hold", fixtures::descend_hold(f, 0.4 * L, 0.45 * L)},
          {"curved_slide", fixtures::curved_slide(f, 0.3 * L, 0.5 * L, 0.4 * L)},
          {"contact_heavy", fixtures::contact_heavy(f, 10000)}};
}

// Drives the HIP from 3 mm above (x, y) straight down to `target`, then holds.
Trajectory approach_and_hold(const DepthField& f, const Vec3& target, std::size_t hold) {
  Trajectory tr;
  const double top = oracle::bilinear(f, target.x(), target.y()) + 3.0;
  for (double z = top; z > target.z(); z -= 0.01) {
    tr.push_back({static_cast<std::int64_t>(tr.size()), Vec3(target.x(), target.y(), z)});
  }
  for (std::size_t k = 0; k <= hold; ++k) {
    tr.push_back({static_cast<std::int64_t>(tr.size()), target});
  }
  return tr;
}

Vec3 analytic_normal(FieldKind kind, double x, double y) {
  const double h = 1e-5;
  const double fx = (fixtures::height(kind, x + h, y) - fixtures::height(kind, x - h, y)) / (2 * h);
  const double fy = (fixtures::height(kind, x, y + h) - fixtures::height(kind, x, y - h)) / (2 * h);
  return Vec3(-fx, -fy, 1.0).normalized();
}

// ---------------------------------------------------------------------------

// Host steal time in clock ticks from /proc/stat, or -1 where unavailable.
long long steal_ticks() {
  std::ifstream in("/proc/stat");
  std::string cpu;
  long long v[8] = {};
  if (!(in >> cpu) || cpu != "cpu") return -1;
  for (auto& x : v) {
    if (!(in >> x)) return -1;
  }
  return v[7];
}

Result latency_budget() {
  Result r;
  const long long steal0 = steal_ticks();
  const auto start = Clock::now();
  const DepthField f = fixtures::make_field(FieldKind::kRelief, 800);
  const Trajectory tr = fixtures::contact_heavy(f, 10000);
  const RenderParams p;
  const LatencyStats s = benchmark_latency(f, tr, p, 3);
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  const long long steal1 = steal_ticks();
  r.pass = s.ticks >= 10000 && s.mean_us < 100.0 && s.p99_us < 1000.0 && s.overrun_count == 0 &&
           wall < 60.0;
  r.detail << "field=800x800 " << format_latency(s) << " wall_s=" << wall
           << " host_steal_ticks=" << (steal0 < 0 || steal1 < 0 ? -1 : steal1 - steal0)
           << " (mean<100 p99<1000 overruns=0 wall<60)";
  return r;
}

Result non_penetration() {
  Result r;
  const RenderParams p;
  std::size_t ticks = 0, violations = 0;
  double worst = 0.0;
  auto check = [&](const DepthField& f, const ForceTrace& t) {
    for (const auto& s : t.samples) {
      ++ticks;
      const double gap = s.proxy.z() - oracle::bilinear(f, s.proxy.x(), s.proxy.y());
      worst = std::min(worst, gap);
      if (gap < -1e-3) ++violations;
    }
  };

  for (auto kind : kAllKinds) {
    const DepthField f = fixtures::make_field(kind, 201);
    for (const auto& [name, tr] : fixture_trajectories(f)) check(f, run_trajectory(f, tr, p));
  }

  std::size_t walks = 0;
  for (auto kind : {FieldKind::kFlat, FieldKind::kRamp, FieldKind::kParaboloid, FieldKind::kSine,
                    FieldKind::kHoled}) {
    const DepthField f = fixtures::make_field(kind, 129);
    std::mt19937 rng(1234 + static_cast<unsigned>(kind));
    std::uniform_real_distribution<double> u(0.0, f.extent_x());
    std::normal_distribution<double> step(0.0, 0.08);
    for (int w = 0; w < 1000; ++w, ++walks) {
      Vec3 hip(u(rng), u(rng), 0.0);
      hip.z() = oracle::bilinear(f, hip.x(), hip.y()) + 1.0;
      Trajectory tr;
      for (int k = 0; k < 400; ++k) {
        // Sink steadily for the first half, then wander; lateral steps may
        // leave the grid.
        hip += Vec3(step(rng), step(rng), step(rng) - (k < 200 ? 0.015 : 0.0));
        tr.push_back({k, hip});
      }
      check(f, run_trajectory(f, tr, p));
    }
  }
  r.pass = violations == 0;
  r.detail << "ticks=" << ticks << " walks=" << walks << " violations=" << violations
           << " worst_gap_mm=" << worst << " (tolerance 1e-3)";
  return r;
}

Result closest_point() {
  Result r;
  const RenderParams p;
  std::size_t samples = 0, failures = 0;
  double worst = 0.0;
  for (auto kind : {FieldKind::kParaboloid, FieldKind::kSphereCap}) {
    const DepthField f = fixtures::make_field(kind, 128);
    std::mt19937 rng(77 + static_cast<unsigned>(kind));
    std::uniform_real_distribution<double> lateral(0.2 * f.extent_x(), 0.8 * f.extent_x());
    std::uniform_real_distribution<double> depth(0.1, 2.0);
    for (int k = 0; k < 100; ++k, ++samples) {
      const double x = lateral(rng), y = lateral(rng);
      const Vec3 hip(x, y, oracle::bilinear(f, x, y) - depth(rng));
      const ForceTrace t = run_trajectory(f, approach_and_hold(f, hip, 300), p);
      const auto& last = t.samples.back();
      const double got = (last.hip - last.proxy).norm();
      const double best = oracle::min_surface_distance(f, hip, 3.0);
      const double ratio = got / best;
      worst = std::max(worst, ratio);
      if (!last.in_contact || ratio > 1.05) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail << "hips=" << samples << " failures=" << failures << " worst_ratio=" << worst
           << " (bound 1.05)";
  return r;
}

Result force_law() {
  Result r;
  const RenderParams p;
  double worst_planar = 0.0, worst_deg = 0.0;
  std::size_t planar = 0, curved = 0;
  std::mt19937 rng(5);

  // Flat and ramp: closed-form spring force along the plane normal.
  for (auto kind : {FieldKind::kFlat, FieldKind::kRamp}) {
    const DepthField f = fixtures::make_field(kind, 101);
    std::uniform_real_distribution<double> lateral(0.2 * f.extent_x(), 0.8 * f.extent_x());
    std::uniform_real_distribution<double> depth(0.05, 2.0);
    for (int k = 0; k < 25; ++k, ++planar) {
      const double x = lateral(rng), y = lateral(rng);
      const Vec3 hip(x, y, fixtures::height(kind, x, y) - depth(rng));
      const ForceTrace t = run_trajectory(f, approach_and_hold(f, hip, 300), p);
      Vec3 expected;
      if (kind == FieldKind::kFlat) {
        expected = Vec3(0, 0, p.stiffness_k * (10.0 - hip.z()));
      } else {
        const Vec3 n = Vec3(-0.5, 0.0, 1.0) / std::sqrt(1.25);
        const double d = (5.0 + 0.5 * hip.x() - hip.z()) / std::sqrt(1.25);
        expected = p.stiffness_k * d * n;
      }
      worst_planar = std::max(worst_planar, (t.samples.back().force - expected).norm());
    }
  }

  // Curved: force along the analytic normal at the proxy, penetration <= 1 mm.
  for (auto kind : {FieldKind::kParaboloid, FieldKind::kSphereCap}) {
    const DepthField f = fixtures::make_field(kind, 401);
    std::uniform_real_distribution<double> lateral(0.2 * f.extent_x(), 0.8 * f.extent_x());
    std::uniform_real_distribution<double> depth(0.05, 1.0);
    for (int k = 0; k < 25; ++k) {
      const double x = lateral(rng), y = lateral(rng);
      const Vec3 hip(x, y, fixtures::height(kind, x, y) - depth(rng));
      const ForceTrace t = run_trajectory(f, approach_and_hold(f, hip, 100), p);
      for (const auto& s : t.samples) {
        if (!s.in_contact || (s.hip - s.proxy).norm() < 0.02) continue;
        ++curved;
        worst_deg = std::max(worst_deg, oracle::degrees(oracle::angle_between(
                                            s.force, analytic_normal(kind, s.proxy.x(), s.proxy.y()))));
      }
    }
    const auto slide = run_trajectory(f, fixtures::curved_slide(f, 30, 45, 40, 1.0, 100), p);
    for (const auto& s : slide.samples) {
      if (!s.in_contact || (s.hip - s.proxy).norm() < 0.02) continue;
      ++curved;
      worst_deg = std::max(worst_deg, oracle::degrees(oracle::angle_between(
                                          s.force, analytic_normal(kind, s.proxy.x(), s.proxy.y()))));
    }
  }
  r.pass = worst_planar <= 1e-9 && worst_deg <= 5.0 && curved > 1000;
  r.detail << "planar_hips=" << planar << " worst_force_err_N=" << worst_planar
           << " curved_ticks=" << curved << " worst_angle_deg=" << worst_deg
           << " (bounds 1e-9 N, 5 deg)";
  return r;
}

Result phase_structure() {
  Result r;
  const RenderParams p;
  std::size_t traces = 0;
  std::string first_failure;
  for (std::size_t nodes : {16u, 101u, 401u, 1600u}) {
    for (auto kind : kAllKinds) {
      const DepthField f = fixtures::make_field(kind, nodes);
      const double L = f.extent_x();
      for (const auto& tr : {fixtures::descend_hold(f, 0.4 * L, 0.45 * L),
                             fixtures::curved_slide(f, 0.3 * L, 0.5 * L, 0.4 * L)}) {
        const ForceTrace t = run_trajectory(f, tr, p);
        const PhaseReport rep = check_phases(t, p);
        ++traces;
        bool has_all = rep.segments.size() >= 3;
        if ((!rep.passed() || !has_all) && first_failure.empty()) {
          first_failure = std::string(fixtures::name(kind)) + "@" + std::to_string(nodes) + ": " +
                          (rep.passed() ? "missing phases" : format_phase_report(rep, t));
        }
      }
    }
  }
  r.pass = first_failure.empty();
  r.detail << "traces=" << traces << " resolutions=16..1600";
  if (!r.pass) r.detail << " first_failure=" << first_failure;
  return r;
}

Result pyramid() {
  Result r;
  const auto w = gaussian_kernel();
  double worst = 0.0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<double> v(64 * 64);
    for (auto& x : v) x = u(rng);
    const DepthField f(64, 64, 1.0, v);
    std::size_t ow = 0, oh = 0;
    const auto expected = oracle::convolve_then_decimate(f, w, ow, oh);
    const DepthField got = reduce_level(f);
    if (got.width() != ow || got.height() != oh) worst = INFINITY;
    for (std::size_t k = 0; k < expected.size() && k < got.values().size(); ++k) {
      worst = std::max(worst, std::abs(got.values()[k] - expected[k]));
    }
  }

  bool constant_exact = true;
  for (std::size_t n : {5u, 64u, 257u}) {
    const DepthField c = DepthField::from_function(n, n, 1.0, [](double, double) { return 7.0; });
    const DepthField r = reduce_level(c);
    for (double v : r.values()) constant_exact = constant_exact && v == 7.0;
  }

  const DepthField big = fixtures::make_field(FieldKind::kRelief, 800);
  const auto t0 = Clock::now();
  const DepthPyramid pyr = build_pyramid(big, 3);
  const double build_s = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool chain = pyr.level(0).width() == 800 && pyr.level(1).width() == 400 &&
                     pyr.level(2).width() == 200 && pyr.level(2).height() == 200;

  // Period 2.5 nodes lies above the post-decimation Nyquist limit.
  const DepthField sine = DepthField::from_function(256, 256, 1.0, [](double x, double) {
    return std::sin(2.0 * 3.14159265358979323846 * x / 2.5);
  });
  const DepthField lv1 = reduce_level(sine);
  double naive = 0.0, filtered = 0.0;
  for (std::size_t j = 4; j + 4 < lv1.height(); ++j) {
    for (std::size_t i = 4; i + 4 < lv1.width(); ++i) {
      naive = std::max(naive, std::abs(sine.at(2 * i, 2 * j)));
      filtered = std::max(filtered, std::abs(lv1.at(i, j)));
    }
  }
  const double attenuation = naive / filtered;

  r.pass = worst <= 1e-9 && constant_exact && chain && attenuation >= 4.0 && build_s < 1.0;
  r.detail << "seeds=100 worst_oracle_err_mm=" << worst << " constant_exact=" << constant_exact
           << " chain_800_400_200=" << chain << " attenuation=" << attenuation
           << " build_800_s=" << build_s << " (bounds 1e-9, >=4x, <1 s)";
  return r;
}

Result hole_handling() {
  Result r;
  const RenderParams p;
  const DepthField f = fixtures::make_field(FieldKind::kHoled, 201);
  const double z_max = f.z_max().value();
  const double L = f.extent_x();

  std::vector<Trajectory> trajectories;
  for (auto& [name, tr] : fixture_trajectories(f)) trajectories.push_back(tr);
  // Straight into the hole disc, and sweeps across it.
  trajectories.push_back(fixtures::descend_hold(f, 0.3 * L, 0.65 * L, 2.0));
  trajectories.push_back(fixtures::curved_slide(f, 0.18 * L, 0.65 * L, 0.25 * L, 1.0));
  trajectories.push_back(fixtures::curved_slide(f, 0.2 * L, 0.62 * L, 0.2 * L, 3.0));

  std::size_t ticks = 0, below_plane = 0, penetrating = 0, over_holes = 0;
  for (const auto& tr : trajectories) {
    for (const auto& s : run_trajectory(f, tr, p).samples) {
      ++ticks;
      const double gap = s.proxy.z() - oracle::bilinear(f, s.proxy.x(), s.proxy.y());
      if (gap < -1e-3) ++penetrating;
      // Over a cell whose four corners are all holes the surface is the fill plane.
      const auto i = static_cast<std::size_t>(std::min(s.proxy.x() / f.spacing(), double(f.width() - 2)));
      const auto j = static_cast<std::size_t>(std::min(s.proxy.y() / f.spacing(), double(f.height() - 2)));
      if (f.is_hole(i, j) && f.is_hole(i + 1, j) && f.is_hole(i, j + 1) && f.is_hole(i + 1, j + 1)) {
        ++over_holes;
        if (s.proxy.z() < z_max - 1e-3) ++below_plane;
      }
    }
  }
  const DepthField once = fill_holes(f);
  const bool idempotent = identical(fill_holes(once), once) && identical(once, f);

  r.pass = below_plane == 0 && penetrating == 0 && over_holes > 0 && idempotent;
  r.detail << "ticks=" << ticks << " ticks_over_holes=" << over_holes
           << " below_fill_plane=" << below_plane << " penetrating=" << penetrating
           << " fill_idempotent=" << idempotent;
  return r;
}

Result determinism() {
  Result r;
  const fs::path dir = fs::temp_directory_path() / "relief_acceptance_determinism";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const RenderParams p;
  std::size_t files = 0, mismatches = 0;
  for (auto kind : kAllKinds) {
    const DepthField f = fixtures::make_field(kind, 201);
    for (const auto& [name, tr] : fixture_trajectories(f)) {
      const fs::path a = dir / (std::string(fixtures::name(kind)) + "_" + name + "_a.csv");
      const fs::path b = dir / (std::string(fixtures::name(kind)) + "_" + name + "_b.csv");
      write_force_trace(run_trajectory(f, tr, p), a);
      write_force_trace(run_trajectory(f, tr, p), b);
      ++files;
      if (slurp(a) != slurp(b)) ++mismatches;
    }
  }
  fs::remove_all(dir);
  r.pass = mismatches == 0;
  r.detail << "fixture_pairs=" << files << " mismatches=" << mismatches;
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"latency_budget", latency_budget},   {"non_penetration", non_penetration},
      {"closest_point", closest_point},     {"force_law", force_law},
      {"phase_structure", phase_structure}, {"pyramid", pyramid},
      {"hole_handling", hole_handling},     {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << "exception: " << e.what();
    }
    if (!r.pass) ++failed;
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << ' ' << r.detail.str() << std::endl;
  }
  std::cout << (failed == 0 ? "ALL PASS" : "FAILED " + std::to_string(failed)) << std::endl;
  return failed == 0 ? 0 : 1;
}
