#include "relief/depth_field.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "relief/errors.hpp"

namespace relief {

DepthField::DepthField(std::size_t width, std::size_t height, double spacing,
                       std::vector<double> values, std::vector<std::uint8_t> hole_mask,
                       std::optional<double> z_max)
    : width_(width),
      height_(height),
      spacing_(spacing),
      values_(std::move(values)),
      hole_mask_(std::move(hole_mask)),
      z_max_(z_max) {
  if (width_ < 2 || height_ < 2) {
    throw ValidationError("depth field must be at least 2x2, got " + std::to_string(width_) +
                          "x" + std::to_string(height_));
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw ValidationError("depth field spacing must be positive and finite");
  }
  const std::size_t n = width_ * height_;
  if (values_.size() != n) {
    throw ValidationError("depth field expects " + std::to_string(n) + " values, got " +
                          std::to_string(values_.size()));
  }
  if (hole_mask_.empty()) {
    hole_mask_.assign(n, 0);
  } else if (hole_mask_.size() != n) {
    throw ValidationError("hole mask size does not match the grid");
  }
  if (z_max_ && !std::isfinite(*z_max_)) {
    throw ValidationError("z_max must be finite");
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double v = values_[k];
    if (hole_mask_[k] != 0) {
      hole_mask_[k] = 1;
      ++hole_count_;
      if (!std::isfinite(v)) filled_ = false;
      continue;
    }
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite depth at node (" + std::to_string(k % width_) + ", " +
                            std::to_string(k / width_) + ") without a hole flag");
    }
    if (!max_sample_ || v > *max_sample_) max_sample_ = v;
  }
}

DepthField DepthField::from_function(std::size_t width, std::size_t height, double spacing,
                                     const std::function<double(double, double)>& fn) {
  std::vector<double> values(width * height);
  for (std::size_t j = 0; j < height; ++j) {
    for (std::size_t i = 0; i < width; ++i) {
      values[j * width + i] =
          fn(static_cast<double>(i) * spacing, static_cast<double>(j) * spacing);
    }
  }
  return DepthField(width, height, spacing, std::move(values));
}

bool identical(const DepthField& a, const DepthField& b) noexcept {
  if (a.width() != b.width() || a.height() != b.height()) return false;
  const double sa = a.spacing();
  const double sb = b.spacing();
  if (std::memcmp(&sa, &sb, sizeof(double)) != 0) return false;
  if (a.z_max().has_value() != b.z_max().has_value()) return false;
  if (a.z_max()) {
    const double za = *a.z_max();
    const double zb = *b.z_max();
    if (std::memcmp(&za, &zb, sizeof(double)) != 0) return false;
  }
  const auto va = a.values();
  const auto vb = b.values();
  if (std::memcmp(va.data(), vb.data(), va.size_bytes()) != 0) return false;
  const auto ma = a.hole_mask();
  const auto mb = b.hole_mask();
  return std::memcmp(ma.data(), mb.data(), ma.size_bytes()) == 0;
}

}  // namespace relief
