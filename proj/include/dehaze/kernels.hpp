#pragma once

// Hot loops of the pipeline. Each kernel has an optimized entry point
// (OpenMP over rows, or im2col plus a matrix product) and a plain serial version under
// `reference` that the tests and the benchmark compare against.

#include <cstddef>
#include <span>
#include <vector>

#include "dehaze/patches.hpp"

namespace dehaze::kernels {

// ---------------------------------------------------------------- footprints

/// sum[x] += value and count[x] += 1 for every pixel x under each square footprint.
void accumulate_footprints(std::span<const PatchOrigin> origins, std::span<const double> values,
                           std::size_t size, std::size_t height, std::size_t width,
                           std::span<double> sum, std::span<double> count);

// ---------------------------------------------------------------- convolution

/// Stride-1 cross-correlation with "same" zero padding over an odd square kernel.
/// Layouts: input [in][h][w], weights [out][in][k][k], output [out][h][w].
struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t height;
  std::size_t width;

  std::size_t pad() const { return (kernel - 1) / 2; }
  std::size_t pixels() const { return height * width; }
  std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
};

struct ConvScratch {
  std::vector<double> columns;
  std::vector<double> grad_columns;
};

void conv2d_forward(const ConvShape& shape, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> bias,
                    std::span<double> output, ConvScratch& scratch);

/// Accumulates into grad_weights and grad_bias; overwrites grad_input unless it is empty.
void conv2d_backward(const ConvShape& shape, std::span<const double> input,
                     std::span<const double> weights, std::span<const double> grad_output,
                     std::span<double> grad_input, std::span<double> grad_weights,
                     std::span<double> grad_bias, ConvScratch& scratch);

// ---------------------------------------------------------------- dense

/// out = W in + b with W row-major [out][in].
void dense_forward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias,
                   std::span<double> output);

void dense_backward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> grad_output,
                    std::span<double> grad_input, std::span<double> grad_weights,
                    std::span<double> grad_bias);

// ---------------------------------------------------------------- screened Laplacian

/// out = mask * t + lambda * L_w t on a 4-connected grid. w_right is H x (W-1),
/// w_down is (H-1) x W, one weight per undirected edge.
void apply_system(std::size_t height, std::size_t width, std::span<const double> t,
                  std::span<const double> mask, std::span<const double> w_right,
                  std::span<const double> w_down, double lambda, std::span<double> out);

namespace reference {

void accumulate_footprints(std::span<const PatchOrigin> origins, std::span<const double> values,
                           std::size_t size, std::size_t height, std::size_t width,
                           std::span<double> sum, std::span<double> count);

void conv2d_forward(const ConvShape& shape, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> bias,
                    std::span<double> output);

void conv2d_backward(const ConvShape& shape, std::span<const double> input,
                     std::span<const double> weights, std::span<const double> grad_output,
                     std::span<double> grad_input, std::span<double> grad_weights,
                     std::span<double> grad_bias);

void dense_forward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias,
                   std::span<double> output);

void apply_system(std::size_t height, std::size_t width, std::span<const double> t,
                  std::span<const double> mask, std::span<const double> w_right,
                  std::span<const double> w_down, double lambda, std::span<double> out);

}  // namespace reference

}  // namespace dehaze::kernels
