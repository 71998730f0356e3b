#include "dehaze/nn/layers.hpp"

#include <algorithm>
#include <string>

#include "dehaze/error.hpp"
#include "dehaze/kernels.hpp"

namespace dehaze::nn {

Tensor conv_forward(const Tensor& input, std::span<const double> weights,
                    std::span<const double> biases, std::size_t kernel, std::size_t padding) {
  if (kernel % 2 == 0 || padding != (kernel - 1) / 2) {
    throw ShapeError("conv_forward: only odd kernels with same padding are supported (kernel " +
                     std::to_string(kernel) + ", padding " + std::to_string(padding) + ")");
  }
  const std::size_t out_channels = biases.size();
  const kernels::ConvShape shape{input.channels(), out_channels, kernel, input.height(),
                                 input.width()};
  if (weights.size() != shape.weight_count()) {
    throw ShapeError("conv_forward: weight count " + std::to_string(weights.size()) +
                     " does not match " + std::to_string(out_channels) + "x" +
                     std::to_string(input.channels()) + "x" + std::to_string(kernel) + "x" +
                     std::to_string(kernel));
  }
  Tensor out(out_channels, input.height(), input.width());
  kernels::ConvScratch scratch;
  kernels::conv2d_forward(shape, input.values(), weights, biases, out.values(), scratch);
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

Tensor dense_forward(const Tensor& input, std::span<const double> weights,
                     std::span<const double> biases) {
  const std::size_t n = input.size(), m = biases.size();
  if (weights.size() != n * m) {
    throw ShapeError("dense_forward: weight count " + std::to_string(weights.size()) +
                     " does not match " + std::to_string(m) + "x" + std::to_string(n));
  }
  Tensor out(m, 1, 1);
  kernels::dense_forward(n, m, input.values(), weights, biases, out.values());
  return out;
}

}  // namespace dehaze::nn
