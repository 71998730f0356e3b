#include "dehaze/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dehaze/error.hpp"

namespace dehaze {
namespace {

void check_dims(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw_shape("image dimensions must be positive, got " + std::to_string(height) + "x" +
                std::to_string(width));
  }
}

bool finite_span(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

RgbImage::RgbImage(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
  check_dims(height, width);
  if (!std::isfinite(fill)) throw_domain("non-finite fill value");
  data_.assign(height * width * kChannels, fill);
}

RgbImage::RgbImage(std::size_t height, std::size_t width, std::vector<double> samples)
    : height_(height), width_(width), data_(std::move(samples)) {
  check_dims(height, width);
  if (data_.size() != height * width * kChannels) {
    throw_shape("sample count " + std::to_string(data_.size()) + " does not match " +
                std::to_string(height) + "x" + std::to_string(width) + "x3");
  }
  if (!finite_span(data_)) throw_domain("image contains non-finite samples");
}

RgbImage RgbImage::uniform(std::size_t height, std::size_t width,
                           const std::array<double, 3>& rgb) {
  RgbImage img(height, width);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (std::size_t c = 0; c < kChannels; ++c) img.data_[i * kChannels + c] = rgb[c];
  }
  if (!img.all_finite()) throw_domain("non-finite fill value");
  return img;
}

bool RgbImage::all_finite() const { return finite_span(data_); }

GrayMap::GrayMap(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
  check_dims(height, width);
  if (!std::isfinite(fill)) throw_domain("non-finite fill value");
  data_.assign(height * width, fill);
}

GrayMap::GrayMap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), data_(std::move(values)) {
  check_dims(height, width);
  if (data_.size() != height * width) {
    throw_shape("value count " + std::to_string(data_.size()) + " does not match " +
                std::to_string(height) + "x" + std::to_string(width));
  }
  if (!finite_span(data_)) throw_domain("map contains non-finite values");
}

bool GrayMap::all_finite() const { return finite_span(data_); }

GrayMap luminance(const RgbImage& image) {
  GrayMap y(image.height(), image.width());
  const auto s = image.samples();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = luminance(s[3 * i], s[3 * i + 1], s[3 * i + 2]);
  }
  return y;
}

}  // namespace dehaze
