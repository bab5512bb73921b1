#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace relief {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Regular grid of surface heights z = f(x, y) in millimetres.
///
/// Node (i, j) sits at (i * spacing, j * spacing); values are row-major,
/// index j * width + i. Cells flagged in the hole mask carry no sample until
/// `fill_holes` (asset_io) writes z_max into them; until then their stored
/// value is unspecified (usually NaN) and surface queries are refused.
///
/// Immutable after construction, so one instance can be read concurrently by
/// any number of engines.
class DepthField {
 public:
  /// Throws ValidationError on width/height < 2, non-positive spacing, a size
  /// mismatch, or a non-finite value at a non-hole cell.
  DepthField(std::size_t width, std::size_t height, double spacing,
             std::vector<double> values, std::vector<std::uint8_t> hole_mask = {},
             std::optional<double> z_max = std::nullopt);

  /// Samples `fn(x, y)` at every node.
  static DepthField from_function(std::size_t width, std::size_t height, double spacing,
                                  const std::function<double(double, double)>& fn);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double spacing() const noexcept { return spacing_; }

  /// Lateral extent [0, extent_x] x [0, extent_y] in mm.
  double extent_x() const noexcept { return static_cast<double>(width_ - 1) * spacing_; }
  double extent_y() const noexcept { return static_cast<double>(height_ - 1) * spacing_; }
  bool contains(double x, double y) const noexcept {
    return x >= 0.0 && y >= 0.0 && x <= extent_x() && y <= extent_y();
  }

  double at(std::size_t i, std::size_t j) const noexcept { return values_[j * width_ + i]; }
  bool is_hole(std::size_t i, std::size_t j) const noexcept {
    return hole_mask_[j * width_ + i] != 0;
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> hole_mask() const noexcept { return hole_mask_; }
  std::size_t hole_count() const noexcept { return hole_count_; }

  /// Explicit base-plane fill height, if one was given or filled in.
  std::optional<double> z_max() const noexcept { return z_max_; }

  /// Maximum over non-hole cells; nullopt when every cell is a hole.
  std::optional<double> max_sample() const noexcept { return max_sample_; }

  /// True when every stored value is finite, i.e. holes (if any) are filled.
  bool is_filled() const noexcept { return filled_; }

 private:
  std::size_t width_;
  std::size_t height_;
  double spacing_;
  std::vector<double> values_;
  std::vector<std::uint8_t> hole_mask_;
  std::optional<double> z_max_;
  std::optional<double> max_sample_;
  std::size_t hole_count_ = 0;
  bool filled_ = true;
};

/// Bitwise equality of geometry, values (NaN-aware), mask and z_max.
bool identical(const DepthField& a, const DepthField& b) noexcept;

}  // namespace relief
