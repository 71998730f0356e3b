#include "dehaze/metrics.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include "dehaze/error.hpp"

namespace dehaze {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_same_shape(const RgbImage& a, const RgbImage& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": dimension mismatch " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(window));
  const double centre = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - centre;
    taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" Gaussian filter: output is (H-w+1) x (W-w+1).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += taps[i] * src[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += taps[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double Psnr::decibels() const {
  if (!db_) throw DomainError("PSNR is infinite");
  return *db_;
}

std::string Psnr::to_string() const { return db_ ? format_double(*db_) : "inf"; }

Psnr Psnr::parse(const std::string& text) {
  if (text == "inf") return infinite();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DomainError("cannot parse PSNR value '" + text + "'");
  }
  return finite(v);
}

double mean_squared_error(const RgbImage& reference, const RgbImage& test) {
  require_same_shape(reference, test, "mse");
  const auto a = reference.samples();
  const auto b = test.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

Psnr psnr(const RgbImage& reference, const RgbImage& test) {
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return Psnr::infinite();
  return Psnr::finite(10.0 * std::log10(1.0 / mse));
}

double ssim(const RgbImage& reference, const RgbImage& test, const SsimParams& params) {
  require_same_shape(reference, test, "ssim");
  const std::size_t win = static_cast<std::size_t>(params.window);
  if (reference.height() < win || reference.width() < win) {
    throw ShapeError("ssim: image " + std::to_string(reference.height()) + "x" +
                     std::to_string(reference.width()) + " is smaller than the " +
                     std::to_string(win) + "x" + std::to_string(win) + " window");
  }
  const std::size_t h = reference.height(), w = reference.width();
  const GrayMap ya = luminance(reference);
  const GrayMap yb = luminance(test);
  std::vector<double> a(ya.values().begin(), ya.values().end());
  std::vector<double> b(yb.values().begin(), yb.values().end());
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto taps = gaussian_taps(params.window, params.sigma);
  const auto mu_a = filter_valid(a, h, w, taps);
  const auto mu_b = filter_valid(b, h, w, taps);
  const auto e_aa = filter_valid(aa, h, w, taps);
  const auto e_bb = filter_valid(bb, h, w, taps);
  const auto e_ab = filter_valid(ab, h, w, taps);

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

}  // namespace dehaze
