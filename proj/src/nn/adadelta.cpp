#include "dehaze/nn/adadelta.hpp"

#include <cmath>

#include "dehaze/error.hpp"

namespace dehaze::nn {

void adadelta_step(NetworkParams& params, std::span<const double> gradient,
                   const AdadeltaConfig& config) {
  const std::size_t n = params.values.size();
  if (gradient.size() != n || params.grad_sq_avg.size() != n || params.update_sq_avg.size() != n) {
    throw ShapeError("adadelta_step: gradient/state size does not match parameters");
  }
  const double rho = config.rho, eps = config.eps;
  double* x = params.values.data();
  double* eg = params.grad_sq_avg.data();
  double* ed = params.update_sq_avg.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gradient[i];
    eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(ed[i] + eps) / std::sqrt(eg[i] + eps) * g;
    ed[i] = rho * ed[i] + (1.0 - rho) * dx * dx;
    x[i] += dx;
  }
}

}  // namespace dehaze::nn
