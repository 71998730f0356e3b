#include "dehaze/haze_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dehaze/error.hpp"

namespace dehaze {
namespace {

void require_same_shape(const RgbImage& image, const TransmittanceMap& t, const char* op) {
  if (image.height() != t.height() || image.width() != t.width()) {
    throw ShapeError(std::string(op) + ": image " + std::to_string(image.height()) + "x" +
                     std::to_string(image.width()) + " vs transmittance " +
                     std::to_string(t.height()) + "x" + std::to_string(t.width()));
  }
}

}  // namespace

Airlight::Airlight(const std::array<double, 3>& rgb) : rgb_(rgb) {
  for (double v : rgb_) {
    if (!std::isfinite(v) || v <= 0.0 || v > 1.0) {
      throw DomainError("airlight channel " + std::to_string(v) + " outside (0, 1]");
    }
  }
}

Airlight Airlight::clamped(const std::array<double, 3>& rgb, double floor) {
  std::array<double, 3> c{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!std::isfinite(rgb[i])) throw DomainError("non-finite airlight channel");
    c[i] = std::clamp(rgb[i], floor, 1.0);
  }
  return Airlight(c);
}

ScatteringCoefficient::ScatteringCoefficient(double beta) : beta_(beta) {
  if (!std::isfinite(beta) || beta < 0.0) {
    throw DomainError("scattering coefficient must be finite and >= 0, got " + std::to_string(beta));
  }
}

TransmittanceMap::TransmittanceMap(GrayMap t) : t_(std::move(t)) {
  for (double v : t_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("transmittance value " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

TransmittanceMap::TransmittanceMap(std::size_t height, std::size_t width, double fill)
    : TransmittanceMap(GrayMap(height, width, fill)) {}

TransmittanceMap TransmittanceMap::clamped(GrayMap t) {
  for (double& v : t.values()) v = std::clamp(v, 0.0, 1.0);
  return TransmittanceMap(std::move(t));
}

TransmittanceMap transmittance_from_depth(const GrayMap& depth, ScatteringCoefficient beta) {
  GrayMap t(depth.height(), depth.width());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth[i];
    if (!std::isfinite(d) || d < 0.0) {
      throw DomainError("depth value " + std::to_string(d) + " at index " + std::to_string(i) +
                        " is negative or non-finite");
    }
    t[i] = std::exp(-beta.value() * d);
  }
  return TransmittanceMap(std::move(t));
}

RgbImage synthesize_haze(const RgbImage& clear, const TransmittanceMap& t, const Airlight& a) {
  require_same_shape(clear, t, "synthesize_haze");
  RgbImage out(clear.height(), clear.width());
  const auto in = clear.samples();
  auto dst = out.samples();
  const std::size_t n = clear.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    for (std::size_t c = 0; c < 3; ++c) dst[3 * i + c] = in[3 * i + c] * ti + (1.0 - ti) * a[c];
  }
  return out;
}

RgbImage recover_radiance(const RgbImage& hazy, const TransmittanceMap& t, const Airlight& a) {
  require_same_shape(hazy, t, "recover_radiance");
  RgbImage out(hazy.height(), hazy.width());
  const auto in = hazy.samples();
  auto dst = out.samples();
  const std::size_t n = hazy.pixel_count();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = std::max(kRecoveryTransmittanceFloor, t[i]);
    for (std::size_t c = 0; c < 3; ++c) dst[3 * i + c] = a[c] + (in[3 * i + c] - a[c]) / ti;
  }
  return out;
}

RgbImage clamp_to_unit(const RgbImage& image) {
  RgbImage out = image;
  for (double& v : out.samples()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace dehaze
