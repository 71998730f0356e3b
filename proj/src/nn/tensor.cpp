#include "dehaze/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dehaze/error.hpp"

namespace dehaze::nn {

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width), values_(channels * height * width, fill) {}

Tensor::Tensor(std::size_t channels, std::size_t height, std::size_t width,
               std::vector<double> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != channels * height * width) {
    throw ShapeError("tensor value count " + std::to_string(values_.size()) +
                     " does not match shape " + std::to_string(channels) + "x" +
                     std::to_string(height) + "x" + std::to_string(width));
  }
}

Tensor Tensor::flat(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(n, 1, 1, std::move(values));
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace dehaze::nn
