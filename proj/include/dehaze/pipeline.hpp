#pragma once

#include <cstddef>

#include "dehaze/haze_model.hpp"
#include "dehaze/interpolation.hpp"
#include "dehaze/nn/network.hpp"
#include "dehaze/patches.hpp"

namespace dehaze {

/// Per-patch (t, A) estimator. Implementations must be safe to call concurrently.
class PatchEstimator {
 public:
  virtual ~PatchEstimator() = default;
  virtual nn::EstimatorOutput estimate(const PatchSample& patch) const = 0;
};

class NetworkEstimator final : public PatchEstimator {
 public:
  explicit NetworkEstimator(nn::NetworkParams params);
  nn::EstimatorOutput estimate(const PatchSample& patch) const override;

 private:
  nn::NetworkParams params_;
};

/// Returns the footprint-mean of a known transmittance map and the known
/// airlight; stands in for the network when validating the rest of the pipeline.
class GroundTruthEstimator final : public PatchEstimator {
 public:
  GroundTruthEstimator(TransmittanceMap t, Airlight a) : t_(std::move(t)), a_(a) {}
  nn::EstimatorOutput estimate(const PatchSample& patch) const override;

 private:
  TransmittanceMap t_;
  Airlight a_;
};

struct DehazeConfig {
  std::size_t patch_size = kPatchSize;
  std::size_t stride = kPatchStride;
  double variance_threshold = kDefaultVarianceThreshold;
  InterpolationConfig interpolation;
};

struct DehazeResult {
  RgbImage radiance;  // unclamped
  TransmittanceMap transmittance;
  Airlight airlight;
  std::size_t patches_total = 0;
  std::size_t patches_used = 0;
  bool used_all_patches_fallback = false;
  SolveReport solve;
};

/// extract -> variance filter -> estimate -> aggregate -> interpolate -> recover.
/// If the filter rejects every patch, all patches are used instead and
/// `used_all_patches_fallback` is set.
DehazeResult dehaze(const RgbImage& hazy, const PatchEstimator& estimator,
                    const DehazeConfig& config = {});

}  // namespace dehaze
