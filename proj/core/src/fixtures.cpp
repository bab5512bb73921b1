#include "relief/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "relief/errors.hpp"
#include "relief/surface.hpp"

namespace relief::fixtures {
namespace {

constexpr double kApproachHeight = 3.0;   // mm above the surface
constexpr double kDescentPerTick = 0.01;  // 10 mm/s
constexpr double kSlidePerTick = 0.02;    // 20 mm/s

double dome(double x, double y, double extent) {
  const double c = extent / 2.0;
  const double r2 = (x - c) * (x - c) + (y - c) * (y - c);
  return 40.0 - r2 / 160.0;
}

bool holed_cell(std::size_t i, std::size_t j, double x, double y, double extent) {
  const double dx = x - 0.3 * extent;
  const double dy = y - 0.65 * extent;
  if (std::hypot(dx, dy) < 0.08 * extent) return true;
  return i % 17 == 5 && j % 13 == 7;
}

bool relief_hole(double x, double y, double extent) {
  return x >= 0.05 * extent && x <= 0.15 * extent && y >= 0.05 * extent && y <= 0.15 * extent;
}

double surface_at(const DepthField& field, double x, double y) {
  const Vec2 p = clamp_to_extent(field, x, y);
  return sample_depth(field, p.x(), p.y());
}

// Vertical approach from kApproachHeight above (x, y) to `depth` below.
void append_descent(Trajectory& out, const DepthField& field, double x, double y, double depth) {
  const double top = surface_at(field, x, y);
  const double start = top + kApproachHeight;
  const double stop = top - depth;
  const auto steps = static_cast<std::size_t>(std::ceil((start - stop) / kDescentPerTick));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double z = std::max(stop, start - static_cast<double>(k) * kDescentPerTick);
    out.push_back({static_cast<std::int64_t>(out.size()), Vec3(x, y, z)});
  }
}

void append_hold(Trajectory& out, std::size_t ticks) {
  if (out.empty()) return;
  const Vec3 p = out.back().position;
  for (std::size_t k = 0; k < ticks; ++k) {
    out.push_back({static_cast<std::int64_t>(out.size()), p});
  }
}

}  // namespace

std::string_view name(FieldKind kind) {
  switch (kind) {
    case FieldKind::kFlat: return "flat";
    case FieldKind::kRamp: return "ramp";
    case FieldKind::kParaboloid: return "paraboloid";
    case FieldKind::kSphereCap: return "sphere_cap";
    case FieldKind::kSine: return "sine";
    case FieldKind::kHoled: return "holed";
    case FieldKind::kRelief: return "relief";
  }
  return "unknown";
}

FieldKind field_kind_from_name(std::string_view n) {
  for (auto kind : {FieldKind::kFlat, FieldKind::kRamp, FieldKind::kParaboloid,
                    FieldKind::kSphereCap, FieldKind::kSine, FieldKind::kHoled,
                    FieldKind::kRelief}) {
    if (name(kind) == n) return kind;
  }
  throw ValidationError("unknown fixture field '" + std::string(n) + "'");
}

double height(FieldKind kind, double x, double y, double extent) {
  using std::numbers::pi;
  switch (kind) {
    case FieldKind::kFlat:
      return 10.0;
    case FieldKind::kRamp:
      return 5.0 + 0.5 * x;
    case FieldKind::kParaboloid:
    case FieldKind::kHoled:
      return dome(x, y, extent);
    case FieldKind::kSphereCap: {
      const double c = extent / 2.0;
      const double r2 = (x - c) * (x - c) + (y - c) * (y - c);
      return std::sqrt(90.0 * 90.0 - r2) - 40.0;
    }
    case FieldKind::kSine:
      return 10.0 + 0.5 * std::sin(2.0 * pi * x / 4.0) + 0.3 * std::sin(2.0 * pi * y / 7.0);
    case FieldKind::kRelief:
      return dome(x, y, extent) +
             0.2 * std::sin(2.0 * pi * x / 5.0) * std::sin(2.0 * pi * y / 5.0);
  }
  return 0.0;
}

DepthField make_field(FieldKind kind, std::size_t nodes, double extent) {
  const double spacing = extent / static_cast<double>(nodes - 1);
  std::vector<double> values(nodes * nodes);
  std::vector<std::uint8_t> mask(nodes * nodes, 0);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const double x = static_cast<double>(i) * spacing;
      const double y = static_cast<double>(j) * spacing;
      const std::size_t k = j * nodes + i;
      const bool hole = (kind == FieldKind::kHoled && holed_cell(i, j, x, y, extent)) ||
                        (kind == FieldKind::kRelief && relief_hole(x, y, extent));
      if (hole) {
        mask[k] = 1;
        values[k] = std::numeric_limits<double>::quiet_NaN();
      } else {
        values[k] = height(kind, x, y, extent);
      }
    }
  }
  DepthField field(nodes, nodes, spacing, std::move(values), std::move(mask));
  return field.hole_count() > 0 ? fill_holes(field) : field;
}

Trajectory free_space(const DepthField& field, std::size_t ticks) {
  const double top = std::max(field.max_sample().value_or(0.0), field.z_max().value_or(0.0));
  Trajectory out;
  for (std::size_t k = 0; k < ticks; ++k) {
    const double s = ticks > 1 ? static_cast<double>(k) / static_cast<double>(ticks - 1) : 0.0;
    const double x = (0.1 + 0.8 * s) * field.extent_x();
    const double y = (0.1 + 0.8 * s) * field.extent_y();
    out.push_back({static_cast<std::int64_t>(k), Vec3(x, y, top + 5.0)});
  }
  return out;
}

Trajectory descend_hold(const DepthField& field, double x, double y, double depth,
                        std::size_t hold_ticks) {
  Trajectory out;
  append_descent(out, field, x, y, depth);
  append_hold(out, hold_ticks);
  return out;
}

Trajectory curved_slide(const DepthField& field, double x0, double y0, double distance,
                        double depth, std::size_t hold_ticks) {
  Trajectory out;
  append_descent(out, field, x0, y0, depth);
  const auto steps = static_cast<std::size_t>(std::ceil(distance / kSlidePerTick));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double x = x0 + std::min(distance, static_cast<double>(k) * kSlidePerTick);
    out.push_back({static_cast<std::int64_t>(out.size()),
                   Vec3(x, y0, surface_at(field, x, y0) - depth)});
  }
  append_hold(out, hold_ticks);
  return out;
}

Trajectory contact_heavy(const DepthField& field, std::size_t ticks, double depth) {
  using std::numbers::pi;
  const double cx = field.extent_x() / 2.0;
  const double cy = field.extent_y() / 2.0;
  const double radius = 0.25 * std::min(field.extent_x(), field.extent_y());
  constexpr double kTicksPerLap = 2500.0;

  Trajectory out;
  append_descent(out, field, cx + radius, cy, depth);
  for (std::size_t k = 1; out.size() < ticks; ++k) {
    const double angle = 2.0 * pi * static_cast<double>(k) / kTicksPerLap;
    const double x = cx + radius * std::cos(angle);
    const double y = cy + radius * std::sin(angle);
    out.push_back({static_cast<std::int64_t>(out.size()), Vec3(x, y, surface_at(field, x, y) - depth)});
  }
  return out;
}

}  // namespace relief::fixtures
