#pragma once

#include <span>

#include "dehaze/nn/network.hpp"

namespace dehaze::nn {

struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
};

/// One Adadelta update using the running averages stored in `params`:
///   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
///   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
///   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
///   x       <- x + dx
void adadelta_step(NetworkParams& params, std::span<const double> gradient,
                   const AdadeltaConfig& config = {});

}  // namespace dehaze::nn
