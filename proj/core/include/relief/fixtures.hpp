#pragma once

#include <cstddef>
#include <string_view>

#include "relief/asset_io.hpp"
#include "relief/depth_field.hpp"

namespace relief::fixtures {

/// Synthetic test surfaces spanning a square of `extent` mm.
///
///   flat         z = 10
///   ramp         z = 5 + 0.5 x
///   paraboloid   dome, z = 40 - r^2 / 160 about the centre
///   sphere_cap   z = sqrt(90^2 - r^2) - 40
///   sine         z = 10 + 0.5 sin(2 pi x / 4) + 0.3 sin(2 pi y / 7)
///   holed        paraboloid with a disc of holes and a scattered hole lattice,
///                filled with z_max
///   relief       paraboloid plus a fine 0.2 mm texture and a holed corner,
///                filled with z_max
enum class FieldKind { kFlat, kRamp, kParaboloid, kSphereCap, kSine, kHoled, kRelief };

inline constexpr double kExtent = 101.6;

std::string_view name(FieldKind kind);
FieldKind field_kind_from_name(std::string_view name);

/// Analytic height of the generating function (holes ignored).
double height(FieldKind kind, double x, double y, double extent = kExtent);

/// nodes x nodes grid over [0, extent]^2, hole-filled.
DepthField make_field(FieldKind kind, std::size_t nodes, double extent = kExtent);

/// Hovers 5 mm above the highest sample, sweeping across the field.
Trajectory free_space(const DepthField& field, std::size_t ticks = 500);

/// Approach from 3 mm above (x, y), descend at 10 mm/s to `depth` mm below
/// the surface, then hold still for `hold_ticks`.
Trajectory descend_hold(const DepthField& field, double x, double y, double depth = 1.0,
                        std::size_t hold_ticks = 300);

/// Descend to `depth` below the surface at (x0, y0), slide along +x by
/// `distance` mm at 20 mm/s keeping the HIP `depth` below the surface, then hold.
Trajectory curved_slide(const DepthField& field, double x0, double y0, double distance,
                        double depth = 0.5, std::size_t hold_ticks = 200);

/// Descend at the centre-offset start, then circle at `depth` below the surface
/// for the rest of `ticks`.
Trajectory contact_heavy(const DepthField& field, std::size_t ticks = 10000, double depth = 1.0);

}  // namespace relief::fixtures
