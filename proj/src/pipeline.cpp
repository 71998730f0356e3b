#include "dehaze/pipeline.hpp"

#include <cstdint>
#include <exception>

#include "dehaze/dataset.hpp"
#include "dehaze/error.hpp"

namespace dehaze {

NetworkEstimator::NetworkEstimator(nn::NetworkParams params) : params_(std::move(params)) {
  if (params_.values.size() != nn::parameter_count()) {
    throw ShapeError("NetworkEstimator: parameters do not match the architecture");
  }
}

nn::EstimatorOutput NetworkEstimator::estimate(const PatchSample& patch) const {
  nn::Workspace ws;
  return nn::infer(params_, patch, ws);
}

nn::EstimatorOutput GroundTruthEstimator::estimate(const PatchSample& patch) const {
  return {label_patch(t_, patch.origin, patch.size), a_.rgb()};
}

DehazeResult dehaze(const RgbImage& hazy, const PatchEstimator& estimator,
                    const DehazeConfig& config) {
  config.interpolation.validate();
  auto all = extract_patches(hazy, config.patch_size, config.stride);
  const std::size_t total = all.size();
  auto kept = variance_filter(all, config.variance_threshold);
  const bool fallback = kept.empty();
  if (fallback) kept = std::move(all);

  std::vector<nn::EstimatorOutput> outputs(kept.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(kept.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      outputs[static_cast<std::size_t>(i)] = estimator.estimate(kept[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<PatchEstimate> estimates;
  estimates.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    estimates.push_back({kept[i].origin, outputs[i].t, Airlight::clamped(outputs[i].a)});
  }
  const SparseEstimate sparse = aggregate(estimates, hazy.height(), hazy.width(), config.patch_size);
  SolveReport report;
  TransmittanceMap t = solve_interpolation(sparse, hazy, config.interpolation, &report);
  RgbImage radiance = recover_radiance(hazy, t, sparse.airlight);
  return DehazeResult{std::move(radiance), std::move(t), sparse.airlight, total, kept.size(),
                      fallback, report};
}

}  // namespace dehaze
