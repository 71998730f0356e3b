#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dehaze/haze_model.hpp"
#include "dehaze/image.hpp"

namespace dehaze {

inline constexpr std::size_t kPatchSize = 15;
inline constexpr std::size_t kPatchStride = 5;
inline constexpr double kDefaultVarianceThreshold = 0.002;

struct PatchOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

/// Ground-truth label attached to training patches.
struct PatchLabel {
  double t;
  Airlight a;
};

/// Square RGB block cut from an image, interleaved row-major like RgbImage.
struct PatchSample {
  std::size_t size = kPatchSize;
  PatchOrigin origin;
  std::vector<double> pixels;
  std::optional<PatchLabel> label;

  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return pixels[(row * size + col) * 3 + ch];
  }
};

/// One per-patch estimate to be aggregated.
struct PatchEstimate {
  PatchOrigin origin;
  double t;
  Airlight a;
};

/// Aggregated transmittance with its coverage mask and the global airlight.
struct SparseEstimate {
  GrayMap t_tilde;
  GrayMap mask;  // 1 where at least one footprint landed, else 0
  Airlight airlight;
};

/// Origins along one axis: 0, stride, ... plus (extent - size) when the grid misses the edge.
std::vector<std::size_t> patch_axis_origins(std::size_t extent, std::size_t size, std::size_t stride);

std::vector<PatchOrigin> patch_origins(std::size_t height, std::size_t width,
                                       std::size_t size = kPatchSize,
                                       std::size_t stride = kPatchStride);

PatchSample cut_patch(const RgbImage& image, PatchOrigin origin, std::size_t size = kPatchSize);

/// Row-major patches covering every pixel at least once.
std::vector<PatchSample> extract_patches(const RgbImage& image, std::size_t size = kPatchSize,
                                         std::size_t stride = kPatchStride);

/// Population variance of the channel-mean intensity.
double patch_variance(const PatchSample& patch);

/// Keeps patches whose variance strictly exceeds the threshold, preserving order.
std::vector<PatchSample> variance_filter(std::vector<PatchSample> patches, double threshold);

/// Per-pixel mean of covering estimates plus the mean airlight.
SparseEstimate aggregate(std::span<const PatchEstimate> estimates, std::size_t height,
                         std::size_t width, std::size_t size = kPatchSize);

}  // namespace dehaze
