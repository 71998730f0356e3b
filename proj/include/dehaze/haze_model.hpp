#pragma once

#include <array>

#include "dehaze/image.hpp"

namespace dehaze {

/// Global environmental illumination; every channel in (0, 1].
class Airlight {
 public:
  explicit Airlight(const std::array<double, 3>& rgb);
  Airlight(double r, double g, double b) : Airlight(std::array<double, 3>{r, g, b}) {}

  double operator[](std::size_t c) const { return rgb_[c]; }
  const std::array<double, 3>& rgb() const { return rgb_; }

  /// Clamps each channel into [floor, 1] before validation.
  static Airlight clamped(const std::array<double, 3>& rgb, double floor = kMinChannel);

  static constexpr double kMinChannel = 1e-3;

  friend bool operator==(const Airlight&, const Airlight&) = default;

 private:
  std::array<double, 3> rgb_;
};

/// Attenuation rate per unit depth; beta >= 0.
class ScatteringCoefficient {
 public:
  explicit ScatteringCoefficient(double beta);
  double value() const { return beta_; }

 private:
  double beta_;
};

/// Per-pixel transmittance with values in [0, 1].
class TransmittanceMap {
 public:
  explicit TransmittanceMap(GrayMap t);
  TransmittanceMap(std::size_t height, std::size_t width, double fill);
  /// Clamps into [0,1] instead of rejecting.
  static TransmittanceMap clamped(GrayMap t);

  std::size_t height() const { return t_.height(); }
  std::size_t width() const { return t_.width(); }
  double at(std::size_t row, std::size_t col) const { return t_.at(row, col); }
  double operator[](std::size_t i) const { return t_[i]; }
  const GrayMap& map() const { return t_; }

 private:
  GrayMap t_;
};

/// Lower bound applied to t during radiance recovery.
inline constexpr double kRecoveryTransmittanceFloor = 0.1;

/// t = exp(-beta * d); rejects negative or non-finite depth.
TransmittanceMap transmittance_from_depth(const GrayMap& depth, ScatteringCoefficient beta);

/// I = J t + (1 - t) A, with the same t on every channel.
RgbImage synthesize_haze(const RgbImage& clear, const TransmittanceMap& t, const Airlight& a);

/// J = A + (I - A) / max(0.1, t). The result is not clamped.
RgbImage recover_radiance(const RgbImage& hazy, const TransmittanceMap& t, const Airlight& a);

/// Copy of the image with every sample clamped to [0,1].
RgbImage clamp_to_unit(const RgbImage& image);

}  // namespace dehaze
