#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dehaze::nn {

/// Dense (channels, height, width) array; flat vectors use (length, 1, 1).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  Tensor(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> values);
  static Tensor flat(std::vector<double> values);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool is_flat() const { return height_ == 1 && width_ == 1; }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return values_[(c * height_ + y) * width_ + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return values_[(c * height_ + y) * width_ + x];
  }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

}  // namespace dehaze::nn
