#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "relief/depth_field.hpp"

namespace relief {

using Kernel5x5 = std::array<std::array<double, 5>, 5>;

/// 1-D generating weights (a = 0.4): 0.05, 0.25, 0.40, 0.25, 0.05.
constexpr std::array<double, 5> kGenerating1D = {0.05, 0.25, 0.40, 0.25, 0.05};

/// Separable 5x5 weights w(m, n) = w(m) w(n), indexed [m + 2][n + 2].
Kernel5x5 gaussian_kernel();

/// Number of nodes after one reduction: floor((n - 1) / 2) + 1.
constexpr std::size_t reduced_size(std::size_t n) { return (n - 1) / 2 + 1; }

/// One low-pass-and-decimate step. Output node (i, j) is the kernel-weighted
/// sum of input nodes (2i + m, 2j + n), |m|, |n| <= 2, with indices clamped to
/// the border. Output spacing doubles; z_max is carried over; the result has
/// no holes. Throws SizeError below 5x5 and DomainError on unfilled holes.
DepthField reduce_level(const DepthField& field);

/// Ordered levels, index 0 = finest.
class DepthPyramid {
 public:
  explicit DepthPyramid(std::vector<DepthField> levels);

  std::size_t size() const noexcept { return levels_.size(); }
  const DepthField& level(std::size_t l) const { return levels_.at(l); }
  const std::vector<DepthField>& levels() const noexcept { return levels_; }

 private:
  std::vector<DepthField> levels_;
};

/// levels[0] = field, levels[l] = reduce_level(levels[l - 1]). Throws
/// ValidationError for n_levels < 1 and SizeError naming the first level that
/// cannot be produced.
DepthPyramid build_pyramid(const DepthField& field, std::size_t n_levels);

}  // namespace relief
