#pragma once

#include <span>

#include "dehaze/nn/tensor.hpp"

namespace dehaze::nn {

/// Stride-1 cross-correlation with zero padding. Weights are [out][in][k][k].
/// Only "same" padding, (kernel-1)/2, is supported.
Tensor conv_forward(const Tensor& input, std::span<const double> weights,
                    std::span<const double> biases, std::size_t kernel, std::size_t padding);

Tensor relu(const Tensor& input);

/// W x + b with W row-major [out][in].
Tensor dense_forward(const Tensor& input, std::span<const double> weights,
                     std::span<const double> biases);

}  // namespace dehaze::nn
