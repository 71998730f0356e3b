#pragma once

#include <cstddef>
#include <vector>

#include "dehaze/haze_model.hpp"
#include "dehaze/image.hpp"
#include "dehaze/patches.hpp"

namespace dehaze {

/// Edge weights w = 1 / (|I(x) - I(y)|^2 + eps_w) on the 4-connected grid,
/// stored once per undirected edge.
struct SmoothnessWeights {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> right;  // H x (W-1): (r,c)-(r,c+1)
  std::vector<double> down;   // (H-1) x W: (r,c)-(r+1,c)
};

struct InterpolationConfig {
  double lambda = 1e-2;
  double eps_w = 1e-4;
  double cg_tol = 1e-8;
  std::size_t cg_max_iters = 10000;

  /// Throws DomainError unless every field is positive and cg_tol < 1.
  void validate() const;
};

SmoothnessWeights build_weights(const RgbImage& image, double eps_w);

/// (S + lambda L_w) t, where S = diag(mask) and L_w is the weighted graph Laplacian.
GrayMap apply_system(const GrayMap& t, const GrayMap& mask, const SmoothnessWeights& weights,
                     double lambda);

/// sum_x s(x) (t(x) - t~(x))^2 + lambda * sum_edges w (t(x) - t(y))^2.
double interpolation_energy(const GrayMap& t, const GrayMap& t_tilde, const GrayMap& mask,
                            const SmoothnessWeights& weights, double lambda);

struct SolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned CG solution of (S + lambda L_w) t = S t~, started from the
/// masked mean of t~. Not clamped. Throws NumericError (with the achieved
/// residual) if the tolerance is not met within the iteration cap.
GrayMap solve_system(const SparseEstimate& sparse, const RgbImage& image,
                     const InterpolationConfig& config, SolveReport* report = nullptr);

/// solve_system followed by clamping into [0,1].
TransmittanceMap solve_interpolation(const SparseEstimate& sparse, const RgbImage& image,
                                     const InterpolationConfig& config,
                                     SolveReport* report = nullptr);

}  // namespace dehaze
