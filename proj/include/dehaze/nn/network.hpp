#pragma once

// Joint (t, A) estimator for 15x15x3 patches.
//
// Three convolutional paths run on the input patch, all with "same" zero
// padding so every feature map stays 15x15:
//
//   bottom : 1x1->8, 5x5->8, 3x3->8 (x4)
//   middle : 1x1->8, 7x7->8, 5x5->16
//   fuse1  : concat(bottom, middle) = 24ch, 3x3->8
//   top    : 1x1->8, 7x7->8, 5x5->16, 3x3->8
//   head   : concat(top, fuse1) = 16ch -> flatten 3600 -> dense 40 -> dense 4
//
// ReLU follows every layer except the final 4-unit output, which is linear.
// Output order is (t, A_r, A_g, A_b).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dehaze/kernels.hpp"
#include "dehaze/patches.hpp"

namespace dehaze::nn {

enum class LayerKind : std::uint8_t { kConv = 0, kDense = 1 };

struct LayerDescriptor {
  LayerKind kind;
  std::uint32_t kernel;  // 1 for dense layers
  std::uint32_t in_channels;
  std::uint32_t out_channels;

  std::size_t weight_count() const {
    return std::size_t{out_channels} * in_channels * kernel * kernel;
  }
  std::size_t bias_count() const { return out_channels; }
  std::string describe() const;

  friend bool operator==(const LayerDescriptor&, const LayerDescriptor&) = default;
};

/// Layer indices in descriptor (and serialization) order.
namespace layer {
inline constexpr std::size_t kBottom0 = 0;  // bottom path occupies 0..5
inline constexpr std::size_t kMiddle0 = 6;  // middle path occupies 6..8
inline constexpr std::size_t kFuse1 = 9;
inline constexpr std::size_t kTop0 = 10;  // top path occupies 10..13
inline constexpr std::size_t kDenseHidden = 14;
inline constexpr std::size_t kDenseOut = 15;
inline constexpr std::size_t kCount = 16;
}  // namespace layer

inline constexpr std::size_t kPatchPixels = kPatchSize * kPatchSize;
inline constexpr std::size_t kOutputs = 4;
inline constexpr std::size_t kFlattened = 16 * kPatchPixels;
inline constexpr std::size_t kHidden = 40;

const std::vector<LayerDescriptor>& architecture();

/// Total weights and biases of the fixed architecture.
std::size_t parameter_count();

/// Weights and biases of every layer packed as [W0 b0 W1 b1 ...], plus Adadelta state.
struct NetworkParams {
  std::vector<double> values;
  std::vector<double> grad_sq_avg;    // running E[g^2]
  std::vector<double> update_sq_avg;  // running E[dx^2]

  static NetworkParams zeros();
  /// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static NetworkParams initialized(std::uint64_t seed);

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Offset of a layer's weights inside the packed parameter vector; biases follow.
std::size_t layer_offset(std::size_t layer);

using RawOutput = std::array<double, kOutputs>;

struct EstimatorOutput {
  double t;
  std::array<double, 3> a;
};

/// Activations and scratch for one forward/backward pass. Not shareable
/// between threads; NetworkParams is.
class Workspace {
 public:
  Workspace();

  /// Post-ReLU output of a layer (the 4 raw outputs for the last one).
  std::span<const double> activation(std::size_t layer) const;

 private:
  friend RawOutput forward(const NetworkParams&, std::span<const double>, Workspace&);
  friend double accumulate_gradient(const NetworkParams&, std::span<const double>,
                                    const RawOutput&, Workspace&, std::span<double>);

  std::span<double> act(std::size_t layer);
  std::span<double> grad(std::size_t layer);

  std::vector<double> input_;  // [3][15][15]
  std::vector<double> cat1_;   // [24][15][15]: bottom (8) then middle (16)
  std::vector<double> cat2_;   // [16][15][15]: top (8) then fuse1 (8)
  std::vector<double> dcat1_;
  std::vector<double> dcat2_;
  std::vector<std::vector<double>> acts_;
  std::vector<std::vector<double>> grads_;
  kernels::ConvScratch scratch_;
};

/// Interleaved HWC patch pixels to the network's CHW input layout.
std::vector<double> to_network_input(const PatchSample& patch);

/// Raw linear outputs for an input already in CHW layout.
RawOutput forward(const NetworkParams& params, std::span<const double> input, Workspace& ws);
RawOutput forward(const NetworkParams& params, const PatchSample& patch);

/// Splits the raw output and clamps t into [0,1] and A into (0,1].
EstimatorOutput to_estimate(const RawOutput& raw);
EstimatorOutput infer(const NetworkParams& params, const PatchSample& patch, Workspace& ws);

/// Mean of the squared component differences.
double mse_loss(std::span<const double> predicted, std::span<const double> target);

RawOutput label_target(const PatchLabel& label);

/// Adds d(loss)/d(params) into `gradient` and returns the loss.
double accumulate_gradient(const NetworkParams& params, std::span<const double> input,
                           const RawOutput& target, Workspace& ws, std::span<double> gradient);

/// Gradient of the MSE loss with respect to every parameter, for a labeled patch.
std::vector<double> backward(const NetworkParams& params, const PatchSample& patch,
                             const RawOutput& target);

}  // namespace dehaze::nn
