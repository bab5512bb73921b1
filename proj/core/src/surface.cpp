#include "relief/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "relief/errors.hpp"

namespace relief {
namespace {

// Brackets are refined until this short (mm), or until the parameter stops
// changing. Contact forces on planes come out exact to ~1e-12 N.
constexpr double kBisectionTolerance = 1e-12;

struct Cell {
  std::size_t i;
  std::size_t j;
  double tx;
  double ty;
};

// Grid coordinate of x, snapping values within a few ulps of a node onto it
// so node queries are exact even when i * spacing / spacing != i.
double grid_coordinate(double x, double spacing) {
  const double u = x / spacing;
  const double r = std::round(u);
  if (std::abs(u - r) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r)) {
    return r;
  }
  return u;
}

void locate_axis(double u, std::size_t nodes, std::size_t& index, double& t) {
  const auto last_cell = nodes - 2;
  const double cell = std::floor(u);
  if (cell >= static_cast<double>(last_cell)) {
    index = last_cell;
  } else {
    index = static_cast<std::size_t>(cell);
  }
  t = u - static_cast<double>(index);
}

[[noreturn]] void throw_out_of_extent(const DepthField& field, double x, double y) {
  std::ostringstream os;
  os << "query (" << x << ", " << y << ") outside surface extent [0, " << field.extent_x()
     << "] x [0, " << field.extent_y() << "]";
  throw DomainError(os.str());
}

Cell locate(const DepthField& field, double x, double y) {
  if (!field.is_filled()) {
    throw DomainError("surface query on a field with unfilled holes");
  }
  if (!field.contains(x, y)) throw_out_of_extent(field, x, y);
  Cell c{};
  locate_axis(grid_coordinate(x, field.spacing()), field.width(), c.i, c.tx);
  locate_axis(grid_coordinate(y, field.spacing()), field.height(), c.j, c.ty);
  return c;
}

double interpolate(const DepthField& field, const Cell& c) {
  const double v00 = field.at(c.i, c.j);
  const double v10 = field.at(c.i + 1, c.j);
  const double v01 = field.at(c.i, c.j + 1);
  const double v11 = field.at(c.i + 1, c.j + 1);
  return (1.0 - c.tx) * (1.0 - c.ty) * v00 + c.tx * (1.0 - c.ty) * v10 +
         (1.0 - c.tx) * c.ty * v01 + c.tx * c.ty * v11;
}

Vec3 patch_normal(const DepthField& field, const Cell& c) {
  const double v00 = field.at(c.i, c.j);
  const double v10 = field.at(c.i + 1, c.j);
  const double v01 = field.at(c.i, c.j + 1);
  const double v11 = field.at(c.i + 1, c.j + 1);
  const double s = field.spacing();
  const double fx = ((1.0 - c.ty) * (v10 - v00) + c.ty * (v11 - v01)) / s;
  const double fy = ((1.0 - c.tx) * (v01 - v00) + c.tx * (v11 - v10)) / s;
  return Vec3(-fx, -fy, 1.0).normalized();
}

// Largest parameter in [0, 1] for which origin + t * dir stays inside the
// lateral extent, assuming the origin is inside.
double clip_to_extent(const DepthField& field, const Vec3& origin, const Vec3& dir) {
  const Vec3 end = origin + dir;
  if (field.contains(end.x(), end.y())) return 1.0;
  double t_max = 1.0;
  const double lo[2] = {0.0, 0.0};
  const double hi[2] = {field.extent_x(), field.extent_y()};
  for (int axis = 0; axis < 2; ++axis) {
    const double d = dir[axis];
    if (d > 0.0) {
      t_max = std::min(t_max, (hi[axis] - origin[axis]) / d);
    } else if (d < 0.0) {
      t_max = std::min(t_max, (lo[axis] - origin[axis]) / d);
    }
  }
  return std::max(0.0, t_max);
}

Vec3 point_on(const DepthField& field, const Vec3& origin, const Vec3& dir, double t) {
  Vec3 p = origin + t * dir;
  // Rounding can push a clipped endpoint a hair outside the extent.
  const Vec2 c = clamp_to_extent(field, p.x(), p.y());
  p.x() = c.x();
  p.y() = c.y();
  return p;
}

}  // namespace

double sample_depth(const DepthField& field, double x, double y) {
  return interpolate(field, locate(field, x, y));
}

Vec3 surface_normal(const DepthField& field, double x, double y) {
  return patch_normal(field, locate(field, x, y));
}

SurfacePoint surface_point(const DepthField& field, double x, double y) {
  const Cell c = locate(field, x, y);
  return SurfacePoint{Vec3(x, y, interpolate(field, c)), patch_normal(field, c)};
}

bool is_penetrating(const DepthField& field, const Vec3& p) {
  return p.z() < sample_depth(field, p.x(), p.y());
}

double clearance(const DepthField& field, const Vec3& p) {
  return p.z() - sample_depth(field, p.x(), p.y());
}

std::optional<Vec3> ray_surface_intersect(const DepthField& field, const Vec3& origin,
                                          const Vec3& target, double step) {
  if (!(step > 0.0)) throw DomainError("ray march step must be positive");
  const Vec3 dir = target - origin;
  const double length = dir.norm();
  if (!(length > 0.0)) throw DomainError("zero-length ray segment");
  if (!field.contains(origin.x(), origin.y())) throw_out_of_extent(field, origin.x(), origin.y());

  const double t_end = clip_to_extent(field, origin, dir);
  const double usable = t_end * length;
  if (!(usable > 0.0)) return std::nullopt;

  const auto samples = static_cast<std::size_t>(std::ceil(usable / step));
  const double dt = t_end / static_cast<double>(samples);

  double t_prev = 0.0;
  if (clearance(field, origin) < 0.0) throw DomainError("ray origin lies below the surface");

  for (std::size_t k = 1; k <= samples; ++k) {
    const double t = (k == samples) ? t_end : static_cast<double>(k) * dt;
    if (clearance(field, point_on(field, origin, dir, t)) < 0.0) {
      double lo = t_prev;  // clearance >= 0
      double hi = t;       // clearance < 0
      while ((hi - lo) * length > kBisectionTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (clearance(field, point_on(field, origin, dir, mid)) < 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return point_on(field, origin, dir, lo);
    }
    t_prev = t;
  }
  return std::nullopt;
}

Vec2 clamp_to_extent(const DepthField& field, double x, double y) noexcept {
  return Vec2(std::clamp(x, 0.0, field.extent_x()), std::clamp(y, 0.0, field.extent_y()));
}

}  // namespace relief
