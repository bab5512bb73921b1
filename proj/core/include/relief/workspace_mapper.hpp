#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "relief/depth_field.hpp"
#include "relief/proxy_renderer.hpp"
#include "relief/scale_pyramid.hpp"

namespace relief {

/// 4-inch cube.
constexpr double kDefaultWorkspaceExtent = 101.6;
/// Window size in nodes used when zooming without an explicit window.
constexpr std::size_t kDefaultRoiNodes = 200;

/// A pyramid level and a window on it, in that level's node coordinates.
struct RoiSelection {
  std::size_t level = 0;
  std::size_t x = 0;  ///< first column
  std::size_t y = 0;  ///< first row
  std::size_t w = 2;  ///< columns
  std::size_t h = 2;  ///< rows

  friend bool operator==(const RoiSelection&, const RoiSelection&) = default;
};

/// Affine map model-mm -> workspace-mm. Model coordinates are level-invariant
/// because every level doubles the spacing of the one below it.
struct WorkspaceMapping {
  double workspace_extent = kDefaultWorkspaceExtent;
  double lateral_scale = 1.0;
  double depth_gain = 1.0;
  Vec2 window_origin = Vec2::Zero();  ///< model mm of the window's first node
};

Vec3 model_to_workspace(const Vec3& p, const WorkspaceMapping& m);
Vec3 workspace_to_model(const Vec3& p, const WorkspaceMapping& m);

/// Throws SelectionError unless the window lies inside the level and spans at
/// least 2x2 nodes.
void validate_roi(const DepthPyramid& pyramid, const RoiSelection& sel);

struct RoiData {
  DepthField field;  ///< copied sub-grid in model units
  WorkspaceMapping mapping;
};

/// Copies the window out of its level and fits its larger lateral extent to
/// the workspace cube. depth_gain equals lateral_scale, so slopes survive.
RoiData select_roi(const DepthPyramid& pyramid, const RoiSelection& sel,
                   double workspace_extent = kDefaultWorkspaceExtent);

/// The ROI re-expressed in workspace mm (origin at the window's first node).
DepthField to_workspace_field(const DepthField& roi, const WorkspaceMapping& m);

/// A w x h window on `level` centred as close to `center_mm` (model) as the
/// level allows. Sizes are clipped to the level.
RoiSelection centered_window(const DepthPyramid& pyramid, std::size_t level,
                             const Vec2& center_mm, std::size_t w, std::size_t h);

/// Lateral centre of a selection in model mm.
Vec2 window_center(const DepthPyramid& pyramid, const RoiSelection& sel);

/// The ROI currently loaded into the haptic workspace.
struct ActiveRoi {
  RoiSelection selection;
  WorkspaceMapping mapping;
  std::shared_ptr<const DepthField> field;  ///< workspace coordinates
  std::uint64_t version = 0;
};

struct EngineState {
  ActiveRoi roi;
  HapticState haptic;
};

/// Window centre, 10% of the workspace extent above the highest sample.
Vec3 parking_position(const DepthField& workspace_field, double workspace_extent);

ActiveRoi load_roi(const DepthPyramid& pyramid, const RoiSelection& sel,
                   double workspace_extent = kDefaultWorkspaceExtent);

/// Engine with the given ROI loaded and HIP/proxy parked above the surface.
EngineState start_engine(const DepthPyramid& pyramid, const RoiSelection& sel,
                         double workspace_extent = kDefaultWorkspaceExtent);

/// Replaces the active ROI and re-seeds HIP and proxy. A HIP whose model
/// position falls inside the new window keeps that position; the proxy goes to
/// the same lateral point, raised to the surface if the HIP is below it.
/// Otherwise both are parked. Contact and force are reset and the version is
/// bumped. Throws SelectionError on an invalid selection; `state` is untouched.
EngineState switch_roi(const EngineState& state, const DepthPyramid& pyramid,
                       const RoiSelection& sel);

}  // namespace relief
