#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "dehaze/error.hpp"
#include "dehaze/metrics.hpp"
#include "dehaze/pipeline.hpp"
#include "dehaze/scenes.hpp"
#include "support.hpp"

using namespace dehaze;

TEST_SUITE_BEGIN("pipeline");

namespace {

struct Scene {
  RgbImage clean;
  RgbImage hazy;
  TransmittanceMap t;
  Airlight a;
};

Scene hazy_scene(std::size_t h, std::size_t w, std::uint64_t seed, double beta, const Airlight& a) {
  const DepthItem item = procedural_scene(h, w, seed);
  TransmittanceMap t = transmittance_from_depth(item.depth, ScatteringCoefficient(beta));
  RgbImage hazy = synthesize_haze(item.image, t, a);
  return {item.image, std::move(hazy), std::move(t), a};
}

}  // namespace

TEST_CASE("ground-truth estimator returns footprint means") {
  Rng rng(1);
  const TransmittanceMap t(test::random_gray(20, 20, rng));
  const GroundTruthEstimator est(t, Airlight(0.9, 0.8, 0.7));
  PatchSample p;
  p.origin = {3, 4};
  p.pixels.assign(675, 0.5);
  const auto e = est.estimate(p);
  double sum = 0.0;
  for (std::size_t r = 0; r < 15; ++r) {
    for (std::size_t c = 0; c < 15; ++c) sum += t.at(3 + r, 4 + c);
  }
  CHECK(std::abs(e.t - sum / 225.0) < 1e-12);
  CHECK(e.a == std::array<double, 3>{0.9, 0.8, 0.7});
}

TEST_CASE("dehazing with ground-truth estimates recovers the clean image") {
  const Scene s = hazy_scene(96, 96, 3, 1.0, Airlight(0.9, 0.92, 0.95));
  const GroundTruthEstimator est(s.t, s.a);
  const DehazeResult r = dehaze::dehaze(s.hazy, est);
  CHECK(r.radiance.same_shape(s.hazy));
  CHECK(r.transmittance.map().same_shape(s.hazy));
  CHECK_FALSE(r.used_all_patches_fallback);
  CHECK(r.patches_used <= r.patches_total);
  CHECK(r.patches_total == 18 * 18);  // origins 0, 5, ..., 80 plus 81
  for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(r.airlight[c] - s.a[c]) < 1e-12);
  const Psnr before = psnr(s.clean, s.hazy);
  const Psnr after = psnr(s.clean, clamp_to_unit(r.radiance));
  INFO("hazy " << before.to_string() << " dB, dehazed " << after.to_string() << " dB");
  CHECK(after.decibels() > 40.0);
}

TEST_CASE("constant input falls back to all patches") {
  const RgbImage flat = RgbImage::uniform(40, 33, {0.7, 0.7, 0.7});
  const GroundTruthEstimator est(TransmittanceMap(40, 33, 0.6), Airlight(0.9, 0.9, 0.9));
  const DehazeResult r = dehaze::dehaze(flat, est);
  CHECK(r.used_all_patches_fallback);
  CHECK(r.patches_used == r.patches_total);
  CHECK(r.radiance.same_shape(flat));
  for (std::size_t i = 0; i < r.transmittance.map().size(); ++i) {
    CHECK(std::abs(r.transmittance[i] - 0.6) < 1e-9);
  }
}

TEST_CASE("network estimator runs end to end and is thread-count independent") {
  const Scene s = hazy_scene(40, 52, 4, 0.7, Airlight(0.8, 0.85, 0.9));
  const NetworkEstimator est(nn::NetworkParams::initialized(2));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const DehazeResult a = dehaze::dehaze(s.hazy, est);
  omp_set_num_threads(4);
  const DehazeResult b = dehaze::dehaze(s.hazy, est);
  omp_set_num_threads(saved);
  CHECK(a.radiance == b.radiance);
  CHECK(a.transmittance.map() == b.transmittance.map());
  CHECK(a.radiance.same_shape(s.hazy));
  CHECK(a.radiance.all_finite());
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(a.airlight[c] > 0.0);
    CHECK(a.airlight[c] <= 1.0);
  }
}

TEST_CASE("dehaze input errors") {
  const GroundTruthEstimator est(TransmittanceMap(30, 30, 0.5), Airlight(1, 1, 1));
  CHECK_THROWS_AS(dehaze::dehaze(RgbImage(10, 30), est), ShapeError);
  DehazeConfig cfg;
  cfg.interpolation.lambda = -1.0;
  CHECK_THROWS_AS(dehaze::dehaze(RgbImage(20, 20), est, cfg), DomainError);
}

TEST_SUITE_END();
