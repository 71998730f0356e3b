#include "dehaze/nn/train.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>

#include "dehaze/error.hpp"
#include "dehaze/random.hpp"

namespace dehaze::nn {
namespace {

// Upper bound on per-batch partial sums. Chunk boundaries depend only on the
// batch length, never on the thread count.
constexpr std::size_t kMaxChunks = 16;

class GradientReducer {
 public:
  double run(const NetworkParams& params, std::span<const PatchSample* const> samples,
             std::span<double> gradient) {
    const std::size_t n = samples.size();
    const std::size_t chunks = std::min(kMaxChunks, n);
    const std::size_t p = params.values.size();
    partial_.resize(chunks);
    losses_.assign(chunks, 0.0);
    if (workspaces_.size() < chunks) workspaces_.resize(chunks);

    const auto chunk_count = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t ci = 0; ci < chunk_count; ++ci) {
      const auto k = static_cast<std::size_t>(ci);
      auto& acc = partial_[k];
      acc.assign(p, 0.0);
      const std::size_t begin = n * k / chunks, end = n * (k + 1) / chunks;
      double loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const PatchSample& s = *samples[i];
        loss += accumulate_gradient(params, to_network_input(s), label_target(*s.label),
                                    workspaces_[k], acc);
      }
      losses_[k] = loss;
    }

    std::fill(gradient.begin(), gradient.end(), 0.0);
    double loss = 0.0;
    for (std::size_t k = 0; k < chunks; ++k) {
      const auto& acc = partial_[k];
      for (std::size_t j = 0; j < p; ++j) gradient[j] += acc[j];
      loss += losses_[k];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& g : gradient) g *= inv;
    return loss * inv;
  }

 private:
  std::vector<std::vector<double>> partial_;
  std::vector<double> losses_;
  std::vector<Workspace> workspaces_;
};

void require_labels(std::span<const PatchSample> dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].label) throw DomainError("training sample " + std::to_string(i) + " is unlabeled");
  }
}

}  // namespace

double batch_gradient(const NetworkParams& params, std::span<const PatchSample* const> samples,
                      std::span<double> gradient) {
  if (samples.empty()) throw DomainError("batch_gradient: empty batch");
  if (gradient.size() != params.values.size()) throw ShapeError("gradient buffer has wrong size");
  for (const auto* s : samples) {
    if (!s->label) throw DomainError("batch_gradient: unlabeled sample");
  }
  GradientReducer reducer;
  return reducer.run(params, samples, gradient);
}

TrainResult train(NetworkParams params, std::span<const PatchSample> dataset,
                  const TrainConfig& config) {
  if (dataset.empty()) throw DomainError("train: empty dataset");
  if (config.batch_size == 0) throw DomainError("train: batch size must be positive");
  require_labels(dataset);
  if (params.values.size() != parameter_count()) {
    throw ShapeError("train: parameters do not match the architecture");
  }

  TrainResult result{std::move(params), {}};
  result.loss_history.reserve(config.epochs);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const PatchSample*> batch;
  std::vector<double> gradient(parameter_count());
  GradientReducer reducer;
  Rng rng(mix_seed(config.seed, 0x7472'6169'6eULL));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset[order[i]]);
      const double mean_loss = reducer.run(result.params, batch, gradient);
      loss_sum += mean_loss * static_cast<double>(end - start);
      adadelta_step(result.params, gradient, config.optimizer);
    }
    const double epoch_loss = loss_sum / static_cast<double>(order.size());
    result.loss_history.push_back(epoch_loss);
    if (config.on_epoch) config.on_epoch(epoch, epoch_loss);
  }
  return result;
}

}  // namespace dehaze::nn
