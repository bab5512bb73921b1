#include "relief/workspace_mapper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relief/errors.hpp"
#include "relief/surface.hpp"

namespace relief {

Vec3 model_to_workspace(const Vec3& p, const WorkspaceMapping& m) {
  return Vec3((p.x() - m.window_origin.x()) * m.lateral_scale,
              (p.y() - m.window_origin.y()) * m.lateral_scale, p.z() * m.depth_gain);
}

Vec3 workspace_to_model(const Vec3& p, const WorkspaceMapping& m) {
  return Vec3(p.x() / m.lateral_scale + m.window_origin.x(),
              p.y() / m.lateral_scale + m.window_origin.y(), p.z() / m.depth_gain);
}

void validate_roi(const DepthPyramid& pyramid, const RoiSelection& sel) {
  if (sel.level >= pyramid.size()) {
    throw SelectionError("level " + std::to_string(sel.level) + " does not exist (pyramid has " +
                         std::to_string(pyramid.size()) + ")");
  }
  if (sel.w < 2 || sel.h < 2) throw SelectionError("ROI window must span at least 2x2 nodes");
  const DepthField& level = pyramid.level(sel.level);
  if (sel.x + sel.w > level.width() || sel.y + sel.h > level.height()) {
    throw SelectionError("ROI window " + std::to_string(sel.w) + "x" + std::to_string(sel.h) +
                         " at (" + std::to_string(sel.x) + ", " + std::to_string(sel.y) +
                         ") exceeds level " + std::to_string(sel.level) + " (" +
                         std::to_string(level.width()) + "x" + std::to_string(level.height()) +
                         ")");
  }
}

RoiData select_roi(const DepthPyramid& pyramid, const RoiSelection& sel,
                   double workspace_extent) {
  validate_roi(pyramid, sel);
  if (!(workspace_extent > 0.0)) throw ValidationError("workspace extent must be positive");
  const DepthField& level = pyramid.level(sel.level);

  std::vector<double> values(sel.w * sel.h);
  std::vector<std::uint8_t> mask(sel.w * sel.h);
  for (std::size_t j = 0; j < sel.h; ++j) {
    for (std::size_t i = 0; i < sel.w; ++i) {
      values[j * sel.w + i] = level.at(sel.x + i, sel.y + j);
      mask[j * sel.w + i] = level.is_hole(sel.x + i, sel.y + j) ? 1 : 0;
    }
  }
  DepthField sub(sel.w, sel.h, level.spacing(), std::move(values), std::move(mask),
                 level.z_max());

  const double model_extent = std::max(sub.extent_x(), sub.extent_y());
  WorkspaceMapping m;
  m.workspace_extent = workspace_extent;
  m.lateral_scale = workspace_extent / model_extent;
  m.depth_gain = m.lateral_scale;
  m.window_origin = Vec2(static_cast<double>(sel.x) * level.spacing(),
                         static_cast<double>(sel.y) * level.spacing());
  return RoiData{std::move(sub), m};
}

DepthField to_workspace_field(const DepthField& roi, const WorkspaceMapping& m) {
  std::vector<double> values(roi.values().begin(), roi.values().end());
  for (double& v : values) v *= m.depth_gain;
  std::vector<std::uint8_t> mask(roi.hole_mask().begin(), roi.hole_mask().end());
  std::optional<double> z_max;
  if (roi.z_max()) z_max = *roi.z_max() * m.depth_gain;
  return DepthField(roi.width(), roi.height(), roi.spacing() * m.lateral_scale, std::move(values),
                    std::move(mask), z_max);
}

RoiSelection centered_window(const DepthPyramid& pyramid, std::size_t level,
                             const Vec2& center_mm, std::size_t w, std::size_t h) {
  if (level >= pyramid.size()) {
    throw SelectionError("level " + std::to_string(level) + " does not exist");
  }
  const DepthField& f = pyramid.level(level);
  RoiSelection sel;
  sel.level = level;
  sel.w = std::clamp<std::size_t>(w, 2, f.width());
  sel.h = std::clamp<std::size_t>(h, 2, f.height());
  auto origin = [&](double center, std::size_t size, std::size_t nodes) {
    const double first = std::round(center / f.spacing() - static_cast<double>(size - 1) / 2.0);
    const double max_first = static_cast<double>(nodes - size);
    return static_cast<std::size_t>(std::clamp(first, 0.0, max_first));
  };
  sel.x = origin(center_mm.x(), sel.w, f.width());
  sel.y = origin(center_mm.y(), sel.h, f.height());
  return sel;
}

Vec2 window_center(const DepthPyramid& pyramid, const RoiSelection& sel) {
  const double s = pyramid.level(sel.level).spacing();
  return Vec2((static_cast<double>(sel.x) + static_cast<double>(sel.w - 1) / 2.0) * s,
              (static_cast<double>(sel.y) + static_cast<double>(sel.h - 1) / 2.0) * s);
}

Vec3 parking_position(const DepthField& workspace_field, double workspace_extent) {
  double top = workspace_field.max_sample().value_or(0.0);
  if (workspace_field.z_max()) top = std::max(top, *workspace_field.z_max());
  return Vec3(workspace_field.extent_x() / 2.0, workspace_field.extent_y() / 2.0,
              top + 0.1 * workspace_extent);
}

ActiveRoi load_roi(const DepthPyramid& pyramid, const RoiSelection& sel,
                   double workspace_extent) {
  RoiData data = select_roi(pyramid, sel, workspace_extent);
  ActiveRoi roi;
  roi.selection = sel;
  roi.mapping = data.mapping;
  roi.field = std::make_shared<const DepthField>(to_workspace_field(data.field, data.mapping));
  return roi;
}

EngineState start_engine(const DepthPyramid& pyramid, const RoiSelection& sel,
                         double workspace_extent) {
  EngineState state;
  state.roi = load_roi(pyramid, sel, workspace_extent);
  state.haptic = HapticState::at_rest(parking_position(*state.roi.field, workspace_extent));
  return state;
}

EngineState switch_roi(const EngineState& state, const DepthPyramid& pyramid,
                       const RoiSelection& sel) {
  EngineState next;
  next.roi = load_roi(pyramid, sel, state.roi.mapping.workspace_extent);
  next.roi.version = state.roi.version + 1;

  const DepthField& field = *next.roi.field;
  const Vec3 hip_model = workspace_to_model(state.haptic.hip, state.roi.mapping);
  const Vec3 hip = model_to_workspace(hip_model, next.roi.mapping);
  if (field.contains(hip.x(), hip.y())) {
    next.haptic = HapticState::at_rest(hip);
    next.haptic.proxy.z() = std::max(hip.z(), sample_depth(field, hip.x(), hip.y()));
  } else {
    next.haptic =
        HapticState::at_rest(parking_position(field, next.roi.mapping.workspace_extent));
  }
  return next;
}

}  // namespace relief
