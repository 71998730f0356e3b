#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace dehaze {

/// H x W x 3 image with interleaved channels, nominally in [0,1].
class RgbImage {
 public:
  static constexpr std::size_t kChannels = 3;

  RgbImage(std::size_t height, std::size_t width, double fill = 0.0);
  /// Takes interleaved row-major samples; throws if the size is wrong or a value is non-finite.
  RgbImage(std::size_t height, std::size_t width, std::vector<double> samples);

  static RgbImage uniform(std::size_t height, std::size_t width, const std::array<double, 3>& rgb);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t pixel_count() const { return height_ * width_; }

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data_[(row * width_ + col) * kChannels + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * kChannels + ch];
  }
  std::array<double, 3> pixel(std::size_t row, std::size_t col) const {
    const double* p = &data_[(row * width_ + col) * kChannels];
    return {p[0], p[1], p[2]};
  }

  std::span<double> samples() { return data_; }
  std::span<const double> samples() const { return data_; }

  bool all_finite() const;
  template <class Other>
  bool same_shape(const Other& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

/// H x W scalar field: depth, masks and transmittance carriers.
class GrayMap {
 public:
  GrayMap(std::size_t height, std::size_t width, double fill = 0.0);
  GrayMap(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool all_finite() const;
  template <class Other>
  bool same_shape(const Other& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const GrayMap&, const GrayMap&) = default;

 private:
  std::size_t height_;
  std::size_t width_;
  std::vector<double> data_;
};

/// ITU-R 601 luma of an RGB triple.
inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

GrayMap luminance(const RgbImage& image);

}  // namespace dehaze
