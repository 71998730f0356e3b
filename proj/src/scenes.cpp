#include "dehaze/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace dehaze {

RgbImage procedural_texture(std::size_t height, std::size_t width, Rng& rng, double cell) {
  const auto seeds = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(double(height) * double(width) / (cell * cell))));
  struct Site {
    double y, x;
    std::array<double, 3> rgb;
  };
  std::vector<Site> sites(seeds);
  for (auto& s : sites) {
    s.y = rng.uniform(0.0, double(height));
    s.x = rng.uniform(0.0, double(width));
    for (double& c : s.rgb) c = rng.uniform();
  }
  RgbImage img(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const Site* best = &sites.front();
      double best_d = INFINITY;
      for (const auto& s : sites) {
        const double dy = s.y - double(r), dx = s.x - double(c);
        const double d = dy * dy + dx * dx;
        if (d < best_d) {
          best_d = d;
          best = &s;
        }
      }
      for (std::size_t ch = 0; ch < 3; ++ch) {
        img.at(r, c, ch) = std::clamp(best->rgb[ch] + rng.uniform(-0.03, 0.03), 0.0, 1.0);
      }
    }
  }
  return img;
}

GrayMap depth_ramp(std::size_t height, std::size_t width, Rng& rng) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dy = std::sin(angle), dx = std::cos(angle);
  GrayMap d(height, width);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double v = dy * double(r) + dx * double(c);
      d.at(r, c) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& v : d.values()) v = (v - lo) / span;
  return d;
}

DepthItem procedural_scene(std::size_t height, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage image = procedural_texture(height, width, rng);
  GrayMap depth = depth_ramp(height, width, rng);
  return DepthItem{std::move(image), std::move(depth), GrayMap(height, width, 1.0)};
}

DepthDataset procedural_dataset(std::size_t count, std::size_t height, std::size_t width,
                                std::uint64_t seed) {
  DepthDataset out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(procedural_scene(height, width, mix_seed(seed, i)));
  return out;
}

}  // namespace dehaze
