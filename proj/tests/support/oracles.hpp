#pragma once

// Brute-force reference computations used only by tests. None of these share
// code paths with the library routines they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "relief/depth_field.hpp"

namespace relief::oracle {

/// Direct bilinear evaluation from the four corners, written independently of
/// sample_depth (no node snapping, explicit cell search).
inline double bilinear(const DepthField& f, double x, double y) {
  const double s = f.spacing();
  std::size_t i = 0;
  while (i + 2 < f.width() && static_cast<double>(i + 1) * s <= x) ++i;
  std::size_t j = 0;
  while (j + 2 < f.height() && static_cast<double>(j + 1) * s <= y) ++j;
  const double tx = (x - static_cast<double>(i) * s) / s;
  const double ty = (y - static_cast<double>(j) * s) / s;
  const double a = f.at(i, j) + tx * (f.at(i + 1, j) - f.at(i, j));
  const double b = f.at(i, j + 1) + tx * (f.at(i + 1, j + 1) - f.at(i, j + 1));
  return a + ty * (b - a);
}

/// First sign change of (z - f) along origin -> target found by uniform
/// sampling; returns the segment parameter of the first penetrating sample.
inline std::optional<double> first_crossing_scan(const DepthField& f, const Vec3& origin,
                                                 const Vec3& target, std::size_t samples = 100000) {
  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples);
    const Vec3 p = origin + t * (target - origin);
    if (!f.contains(p.x(), p.y())) return std::nullopt;
    if (p.z() < bilinear(f, p.x(), p.y())) return t;
  }
  return std::nullopt;
}

/// Full 2-D convolution with a 5x5 kernel (border clamped) at every input
/// node, then keeping every second node.
inline std::vector<double> convolve_then_decimate(const DepthField& f,
                                                  const std::array<std::array<double, 5>, 5>& w,
                                                  std::size_t& out_w, std::size_t& out_h) {
  const auto W = static_cast<long>(f.width());
  const auto H = static_cast<long>(f.height());
  std::vector<double> full(f.width() * f.height());
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      double acc = 0.0;
      for (long n = -2; n <= 2; ++n) {
        for (long m = -2; m <= 2; ++m) {
          const long xx = std::clamp(x + m, 0L, W - 1);
          const long yy = std::clamp(y + n, 0L, H - 1);
          acc += w[static_cast<std::size_t>(m + 2)][static_cast<std::size_t>(n + 2)] *
                 f.at(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy));
        }
      }
      full[static_cast<std::size_t>(y * W + x)] = acc;
    }
  }
  out_w = 0;
  for (long x = 0; x < W; x += 2) ++out_w;
  out_h = 0;
  for (long y = 0; y < H; y += 2) ++out_h;
  std::vector<double> out;
  for (long y = 0; y < H; y += 2) {
    for (long x = 0; x < W; x += 2) out.push_back(full[static_cast<std::size_t>(y * W + x)]);
  }
  return out;
}

/// Minimum distance from p to the interpolated surface, scanning a lattice 10x
/// denser than the grid within `radius` of p laterally.
inline double min_surface_distance(const DepthField& f, const Vec3& p, double radius) {
  const double step = f.spacing() / 10.0;
  const double x0 = std::max(0.0, p.x() - radius);
  const double x1 = std::min(f.extent_x(), p.x() + radius);
  const double y0 = std::max(0.0, p.y() - radius);
  const double y1 = std::min(f.extent_y(), p.y() + radius);
  double best = std::numeric_limits<double>::infinity();
  for (double y = y0; y <= y1; y += step) {
    for (double x = x0; x <= x1; x += step) {
      const Vec3 q(x, y, bilinear(f, x, y));
      best = std::min(best, (q - p).norm());
    }
  }
  return best;
}

inline double angle_between(const Vec3& a, const Vec3& b) {
  const double c = a.normalized().dot(b.normalized());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline double degrees(double rad) { return rad * 180.0 / 3.14159265358979323846; }

}  // namespace relief::oracle
