#pragma once

#include <optional>

#include "relief/depth_field.hpp"

namespace relief {

/// Point on the interpolated surface with its unit normal (normal.z() > 0).
struct SurfacePoint {
  Vec3 position;
  Vec3 normal;
};

/// Bilinear height at (x, y). Cells own the half-open square [i, i+1) x [j, j+1);
/// the far border belongs to the last cell. Node queries return the stored
/// value exactly. Throws DomainError outside the extent or on an unfilled field.
double sample_depth(const DepthField& field, double x, double y);

/// normalize(-df/dx, -df/dy, 1) from the analytic gradient of the bilinear
/// patch owning (x, y).
Vec3 surface_normal(const DepthField& field, double x, double y);

SurfacePoint surface_point(const DepthField& field, double x, double y);

/// p.z < f(p.x, p.y). A point exactly on the surface is not penetrating.
bool is_penetrating(const DepthField& field, const Vec3& p);

/// Signed clearance p.z - f(p.x, p.y).
double clearance(const DepthField& field, const Vec3& p);

/// First crossing of the segment origin -> target into the surface.
///
/// Marches in increments no longer than `step`, then bisects the bracketing
/// interval. The returned point is the non-penetrating end of the final
/// bracket, so it never lies below the surface. The search stops where the
/// segment leaves the lateral extent. Empty when no crossing is found.
/// Throws DomainError on a zero-length segment, a non-positive step, or an
/// origin that is outside the extent or below the surface.
std::optional<Vec3> ray_surface_intersect(const DepthField& field, const Vec3& origin,
                                          const Vec3& target, double step);

/// Closest point of the lateral extent to (x, y).
Vec2 clamp_to_extent(const DepthField& field, double x, double y) noexcept;

}  // namespace relief
