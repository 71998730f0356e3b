#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dehaze/haze_model.hpp"
#include "dehaze/image.hpp"
#include "dehaze/patches.hpp"
#include "dehaze/random.hpp"

namespace dehaze {

/// Clean image with its depth map; `valid` is 1 where depth is known.
struct DepthItem {
  RgbImage image;
  GrayMap depth;
  GrayMap valid;
};

using DepthDataset = std::vector<DepthItem>;

struct Interval {
  double low;
  double high;
};

struct SynthConfig {
  Interval beta_range{0.5, 1.0};
  Interval airlight_range{0.7, 1.0};
  std::size_t patch_size = kPatchSize;
  std::size_t stride = kPatchStride;
  double variance_threshold = kDefaultVarianceThreshold;
  double max_missing_depth_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct HazeParams {
  ScatteringCoefficient beta;
  Airlight airlight;
};

/// beta ~ U(beta_range); each airlight channel ~ U(airlight_range) independently.
HazeParams sample_haze_params(const SynthConfig& config, Rng& rng);

/// Mean transmittance over a size x size footprint.
double label_patch(const TransmittanceMap& t, PatchOrigin origin, std::size_t size = kPatchSize);

/// Divides valid depth by its maximum and fills unknown pixels with the mean
/// normalized valid depth. Throws DomainError if no pixel is valid.
GrayMap normalize_depth(const GrayMap& depth, const GrayMap& valid);

struct SynthStats {
  std::size_t extracted = 0;
  std::size_t rejected_smooth = 0;
  std::size_t rejected_missing_depth = 0;
  std::size_t emitted = 0;

  SynthStats& operator+=(const SynthStats& o);
};

/// Hazes one item with fixed (beta, A), then cuts, filters and labels its patches.
std::vector<PatchSample> synthesize_item_patches(const DepthItem& item,
                                                 ScatteringCoefficient beta,
                                                 const Airlight& airlight,
                                                 const SynthConfig& config,
                                                 SynthStats* stats = nullptr);

/// One (beta, A) draw per item from a sub-seed of config.seed; output is in item order.
std::vector<PatchSample> build_training_set(const DepthDataset& dataset, const SynthConfig& config,
                                            SynthStats* stats = nullptr);

// ---------------------------------------------------------------- files

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path depth;
  std::optional<std::filesystem::path> mask;
};

/// Whitespace-separated "image depth [mask]" lines; '#' starts a comment.
/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

DepthDataset load_dataset(const std::filesystem::path& manifest);

// Patch-set container (little-endian):
//   "DHZP", u32 version (1), u32 patch size, u64 count,
//   per patch: u64 row, u64 col, u8 labeled,
//              f64 pixels[size*size*3] (row-major, interleaved RGB),
//              if labeled: f64 t, f64 A_r, f64 A_g, f64 A_b
void save_patch_set(std::span<const PatchSample> patches, const std::filesystem::path& path);
std::vector<PatchSample> load_patch_set(const std::filesystem::path& path);

}  // namespace dehaze
