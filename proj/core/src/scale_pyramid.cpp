#include "relief/scale_pyramid.hpp"

#include <algorithm>
#include <string>

#include "relief/errors.hpp"

namespace relief {
namespace {

std::size_t clamp_index(std::ptrdiff_t k, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

}  // namespace

Kernel5x5 gaussian_kernel() {
  Kernel5x5 w{};
  for (std::size_t m = 0; m < 5; ++m) {
    for (std::size_t n = 0; n < 5; ++n) w[m][n] = kGenerating1D[m] * kGenerating1D[n];
  }
  return w;
}

DepthField reduce_level(const DepthField& field) {
  const std::size_t in_w = field.width();
  const std::size_t in_h = field.height();
  if (in_w < 5 || in_h < 5) {
    throw SizeError("reduce_level needs at least 5x5 nodes, got " + std::to_string(in_w) + "x" +
                    std::to_string(in_h));
  }
  if (!field.is_filled()) throw DomainError("reduce_level on a field with unfilled holes");

  const std::size_t out_w = reduced_size(in_w);
  const std::size_t out_h = reduced_size(in_h);

  // Horizontal pass on every input row, then vertical pass on the result.
  // Taps are summed as offsets from the centre sample so constants pass through exactly.
  std::vector<double> rows(out_w * in_h);
  for (std::size_t y = 0; y < in_h; ++y) {
    for (std::size_t i = 0; i < out_w; ++i) {
      const double ref = field.at(2 * i, y);
      double acc = 0.0;
      for (std::ptrdiff_t m = -2; m <= 2; ++m) {
        const auto x = clamp_index(2 * static_cast<std::ptrdiff_t>(i) + m, in_w);
        acc += kGenerating1D[static_cast<std::size_t>(m + 2)] * (field.at(x, y) - ref);
      }
      rows[y * out_w + i] = ref + acc;
    }
  }

  std::vector<double> out(out_w * out_h);
  for (std::size_t j = 0; j < out_h; ++j) {
    for (std::size_t i = 0; i < out_w; ++i) {
      const double ref = rows[2 * j * out_w + i];
      double acc = 0.0;
      for (std::ptrdiff_t n = -2; n <= 2; ++n) {
        const auto y = clamp_index(2 * static_cast<std::ptrdiff_t>(j) + n, in_h);
        acc += kGenerating1D[static_cast<std::size_t>(n + 2)] * (rows[y * out_w + i] - ref);
      }
      out[j * out_w + i] = ref + acc;
    }
  }
  return DepthField(out_w, out_h, 2.0 * field.spacing(), std::move(out), {}, field.z_max());
}

DepthPyramid::DepthPyramid(std::vector<DepthField> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw ValidationError("a pyramid needs at least one level");
}

DepthPyramid build_pyramid(const DepthField& field, std::size_t n_levels) {
  if (n_levels < 1) throw ValidationError("n_levels must be at least 1");
  std::vector<DepthField> levels;
  levels.reserve(n_levels);
  levels.push_back(field);
  for (std::size_t l = 1; l < n_levels; ++l) {
    const DepthField& prev = levels.back();
    if (prev.width() < 5 || prev.height() < 5) {
      throw SizeError("cannot build pyramid level " + std::to_string(l) + ": level " +
                      std::to_string(l - 1) + " is " + std::to_string(prev.width()) + "x" +
                      std::to_string(prev.height()) + ", reduction needs at least 5x5");
    }
    levels.push_back(reduce_level(prev));
  }
  return DepthPyramid(std::move(levels));
}

}  // namespace relief
