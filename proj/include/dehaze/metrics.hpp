#pragma once

#include <optional>
#include <string>

#include "dehaze/image.hpp"

namespace dehaze {

/// Peak signal-to-noise ratio in decibels, peak 1.0. Identical inputs yield the
/// infinite marker rather than a large sentinel.
class Psnr {
 public:
  static Psnr finite(double db) { return Psnr(db); }
  static Psnr infinite() { return Psnr(std::nullopt); }

  bool is_infinite() const { return !db_.has_value(); }
  /// Throws DomainError when infinite.
  double decibels() const;
  /// "inf" or the value printed with round-trip precision.
  std::string to_string() const;
  static Psnr parse(const std::string& text);

  friend bool operator==(const Psnr&, const Psnr&) = default;

 private:
  explicit Psnr(std::optional<double> db) : db_(db) {}
  std::optional<double> db_;
};

/// Mean squared error over all pixels and channels.
double mean_squared_error(const RgbImage& reference, const RgbImage& test);

Psnr psnr(const RgbImage& reference, const RgbImage& test);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM on the luminance channel over every fully contained Gaussian window.
double ssim(const RgbImage& reference, const RgbImage& test, const SsimParams& params = {});

}  // namespace dehaze
