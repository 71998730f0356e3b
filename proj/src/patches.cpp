#include "dehaze/patches.hpp"

#include <algorithm>
#include <string>

#include "dehaze/error.hpp"
#include "dehaze/kernels.hpp"

namespace dehaze {

std::vector<std::size_t> patch_axis_origins(std::size_t extent, std::size_t size,
                                            std::size_t stride) {
  if (size == 0 || stride == 0) throw_domain("patch size and stride must be positive");
  if (extent < size) {
    throw ShapeError("image extent " + std::to_string(extent) + " is smaller than patch size " +
                     std::to_string(size));
  }
  std::vector<std::size_t> origins;
  for (std::size_t o = 0; o + size <= extent; o += stride) origins.push_back(o);
  if (origins.back() + size < extent) origins.push_back(extent - size);
  return origins;
}

std::vector<PatchOrigin> patch_origins(std::size_t height, std::size_t width, std::size_t size,
                                       std::size_t stride) {
  const auto rows = patch_axis_origins(height, size, stride);
  const auto cols = patch_axis_origins(width, size, stride);
  std::vector<PatchOrigin> out;
  out.reserve(rows.size() * cols.size());
  for (std::size_t r : rows) {
    for (std::size_t c : cols) out.push_back({r, c});
  }
  return out;
}

PatchSample cut_patch(const RgbImage& image, PatchOrigin origin, std::size_t size) {
  if (origin.row + size > image.height() || origin.col + size > image.width()) {
    throw ShapeError("patch at (" + std::to_string(origin.row) + "," + std::to_string(origin.col) +
                     ") exceeds the image");
  }
  PatchSample p;
  p.size = size;
  p.origin = origin;
  p.pixels.resize(size * size * 3);
  const auto src = image.samples();
  for (std::size_t y = 0; y < size; ++y) {
    const std::size_t from = ((origin.row + y) * image.width() + origin.col) * 3;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(from), size * 3,
                p.pixels.begin() + static_cast<std::ptrdiff_t>(y * size * 3));
  }
  return p;
}

std::vector<PatchSample> extract_patches(const RgbImage& image, std::size_t size,
                                         std::size_t stride) {
  const auto origins = patch_origins(image.height(), image.width(), size, stride);
  std::vector<PatchSample> out;
  out.reserve(origins.size());
  for (const auto& o : origins) out.push_back(cut_patch(image, o, size));
  return out;
}

double patch_variance(const PatchSample& patch) {
  const std::size_t n = patch.size * patch.size;
  auto intensity = [&](std::size_t i) {
    return (patch.pixels[3 * i] + patch.pixels[3 * i + 1] + patch.pixels[3 * i + 2]) / 3.0;
  };
  // Shifted by the first pixel so a flat patch gives exactly zero.
  const double shift = intensity(0);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += intensity(i) - shift;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = intensity(i) - shift - mean;
    var += d * d;
  }
  return var / static_cast<double>(n);
}

std::vector<PatchSample> variance_filter(std::vector<PatchSample> patches, double threshold) {
  if (!(threshold >= 0.0)) throw_domain("variance threshold must be >= 0");
  std::erase_if(patches, [&](const PatchSample& p) { return !(patch_variance(p) > threshold); });
  return patches;
}

SparseEstimate aggregate(std::span<const PatchEstimate> estimates, std::size_t height,
                         std::size_t width, std::size_t size) {
  constexpr double kTolerance = 1e-6;
  if (estimates.empty()) throw_domain("aggregate: empty estimate list");
  std::vector<PatchOrigin> origins;
  std::vector<double> values;
  origins.reserve(estimates.size());
  values.reserve(estimates.size());
  std::array<double, 3> a_sum{0.0, 0.0, 0.0};
  for (const auto& e : estimates) {
    if (e.origin.row + size > height || e.origin.col + size > width) {
      throw ShapeError("aggregate: footprint at (" + std::to_string(e.origin.row) + "," +
                       std::to_string(e.origin.col) + ") out of bounds");
    }
    if (!(e.t >= -kTolerance && e.t <= 1.0 + kTolerance)) {
      throw DomainError("aggregate: transmittance " + std::to_string(e.t) + " outside [0,1]");
    }
    origins.push_back(e.origin);
    values.push_back(std::clamp(e.t, 0.0, 1.0));
    for (std::size_t c = 0; c < 3; ++c) a_sum[c] += e.a[c];
  }

  GrayMap sum(height, width, 0.0);
  GrayMap count(height, width, 0.0);
  kernels::accumulate_footprints(origins, values, size, height, width, sum.values(),
                                 count.values());
  GrayMap mask(height, width, 0.0);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] > 0.0) {
      sum[i] = std::clamp(sum[i] / count[i], 0.0, 1.0);
      mask[i] = 1.0;
    }
  }
  const double n = static_cast<double>(estimates.size());
  return SparseEstimate{std::move(sum), std::move(mask),
                        Airlight::clamped({a_sum[0] / n, a_sum[1] / n, a_sum[2] / n})};
}

}  // namespace dehaze
