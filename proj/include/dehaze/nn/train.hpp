#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dehaze/nn/adadelta.hpp"
#include "dehaze/nn/network.hpp"

namespace dehaze::nn {

struct TrainConfig {
  std::size_t epochs = 90;
  std::size_t batch_size = 1000;
  std::uint64_t seed = 0;
  AdadeltaConfig optimizer;
  /// Called after every epoch with (epoch index, mean loss).
  std::function<void(std::size_t, double)> on_epoch;
};

struct TrainResult {
  NetworkParams params;
  std::vector<double> loss_history;  // one mean loss per epoch
};

/// Mini-batch Adadelta on labeled patches. The dataset order is reshuffled
/// every epoch from `seed`; the batch gradient is the mean of per-sample
/// gradients, reduced in a fixed order so results do not depend on the
/// number of OpenMP threads.
TrainResult train(NetworkParams params, std::span<const PatchSample> dataset,
                  const TrainConfig& config);

/// Mean per-sample loss and gradient over `samples`, reduced deterministically.
double batch_gradient(const NetworkParams& params, std::span<const PatchSample* const> samples,
                      std::span<double> gradient);

}  // namespace dehaze::nn
