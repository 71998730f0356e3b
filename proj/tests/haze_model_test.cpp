#include <doctest.h>

#include <cmath>
#include <limits>

#include "dehaze/error.hpp"
#include "dehaze/haze_model.hpp"
#include "support.hpp"

using namespace dehaze;

TEST_SUITE_BEGIN("haze-model");

namespace {

TransmittanceMap random_t(std::size_t h, std::size_t w, Rng& rng, double lo, double hi) {
  return TransmittanceMap(test::random_gray(h, w, rng, lo, hi));
}

Airlight random_airlight(Rng& rng) {
  return Airlight(rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0));
}

}  // namespace

TEST_CASE("domain types validate their invariants") {
  CHECK_THROWS_AS(Airlight(0.0, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(Airlight(0.5, 1.0000001, 0.5), DomainError);
  CHECK_THROWS_AS(Airlight(0.5, NAN, 0.5), DomainError);
  CHECK_NOTHROW(Airlight(1.0, 1.0, 1e-9));
  CHECK(Airlight::clamped({-1.0, 0.5, 2.0}) == Airlight(1e-3, 0.5, 1.0));

  CHECK_THROWS_AS(ScatteringCoefficient{-0.1}, DomainError);
  CHECK_THROWS_AS(ScatteringCoefficient{std::numeric_limits<double>::infinity()}, DomainError);
  CHECK(ScatteringCoefficient(0.0).value() == 0.0);

  CHECK_THROWS_AS(TransmittanceMap(GrayMap(2, 2, 1.5)), DomainError);
  CHECK_THROWS_AS(TransmittanceMap(GrayMap(2, 2, -0.01)), DomainError);
  GrayMap g(1, 2);
  g[0] = -0.5;
  g[1] = 1.5;
  const auto c = TransmittanceMap::clamped(g);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 1.0);
}

TEST_CASE("transmittance_from_depth") {
  Rng rng(2);
  const GrayMap depth = test::random_gray(4, 5, rng, 0.0, 3.0);
  const auto t0 = transmittance_from_depth(depth, ScatteringCoefficient(0.0));
  for (std::size_t i = 0; i < t0.map().size(); ++i) CHECK(t0[i] == 1.0);

  const auto tz = transmittance_from_depth(GrayMap(3, 3, 0.0), ScatteringCoefficient(0.8));
  for (std::size_t i = 0; i < 9; ++i) CHECK(tz[i] == 1.0);

  const auto t = transmittance_from_depth(GrayMap(1, 1, 2.0), ScatteringCoefficient(0.5));
  CHECK(std::abs(t[0] - 0.36787944117144233) < 1e-15);

  GrayMap bad(1, 2, 1.0);
  bad[1] = -1.0;
  CHECK_THROWS_AS(transmittance_from_depth(bad, ScatteringCoefficient(1.0)), DomainError);
  bad[1] = NAN;
  CHECK_THROWS_AS(transmittance_from_depth(bad, ScatteringCoefficient(1.0)), DomainError);
}

TEST_CASE("transmittance is antitone in beta and depth") {
  double last = 2.0;
  for (double beta : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const double t = transmittance_from_depth(GrayMap(1, 1, 0.7), ScatteringCoefficient(beta))[0];
    CHECK(t < last);
    last = t;
  }
  last = 2.0;
  for (double d : {0.0, 0.1, 0.5, 1.0, 4.0}) {
    const double t = transmittance_from_depth(GrayMap(1, 1, d), ScatteringCoefficient(0.6))[0];
    CHECK(t < last);
    last = t;
  }
}

TEST_CASE("synthesize_haze examples") {
  Rng rng(4);
  const RgbImage j = test::random_image(5, 6, rng);
  const Airlight a = random_airlight(rng);
  CHECK(synthesize_haze(j, TransmittanceMap(5, 6, 1.0), a) == j);

  const RgbImage flat_a = RgbImage::uniform(5, 6, a.rgb());
  const RgbImage out = synthesize_haze(flat_a, random_t(5, 6, rng, 0.0, 1.0), a);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) CHECK(std::abs(out.at(r, c, ch) - a[ch]) < 1e-15);
    }
  }

  const RgbImage i = synthesize_haze(RgbImage::uniform(1, 1, {0.2, 0.2, 0.2}),
                                     TransmittanceMap(1, 1, 0.5), Airlight(1.0, 1.0, 1.0));
  for (double v : i.samples()) CHECK(std::abs(v - 0.6) < 1e-15);

  CHECK_THROWS_AS(synthesize_haze(j, TransmittanceMap(5, 5, 1.0), a), ShapeError);
}

TEST_CASE("synthesize_haze moves pixels toward A as t decreases") {
  Rng rng(6);
  const Airlight a(0.9, 0.95, 1.0);
  const RgbImage j = test::random_image(3, 3, rng, 0.0, 0.85);
  RgbImage prev = j;
  for (double t : {0.9, 0.6, 0.3, 0.0}) {
    const RgbImage cur = synthesize_haze(j, TransmittanceMap(3, 3, t), a);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          CHECK(std::abs(a[ch] - cur.at(r, c, ch)) < std::abs(a[ch] - prev.at(r, c, ch)));
        }
      }
    }
    prev = cur;
  }
}

TEST_CASE("recover_radiance examples") {
  Rng rng(9);
  const RgbImage hazy = test::random_image(4, 4, rng);
  const Airlight a = random_airlight(rng);
  const RgbImage same = recover_radiance(hazy, TransmittanceMap(4, 4, 1.0), a);
  for (std::size_t i = 0; i < same.samples().size(); ++i) {
    CHECK(std::abs(same.samples()[i] - hazy.samples()[i]) < 1e-15);
  }

  const RgbImage at_a = RgbImage::uniform(4, 4, a.rgb());
  const RgbImage r = recover_radiance(at_a, random_t(4, 4, rng, 0.0, 1.0), a);
  CHECK(r == at_a);

  // Below the 0.1 floor the division uses 0.1.
  const RgbImage low = recover_radiance(RgbImage::uniform(1, 1, {0.5, 0.5, 0.5}),
                                        TransmittanceMap(1, 1, 0.01), Airlight(1.0, 1.0, 1.0));
  CHECK(std::abs(low.at(0, 0, 0) - (1.0 + (0.5 - 1.0) / 0.1)) < 1e-12);
  CHECK(low.at(0, 0, 0) < 0.0);  // kept out of gamut
  CHECK(clamp_to_unit(low).at(0, 0, 0) == 0.0);

  CHECK_THROWS_AS(recover_radiance(hazy, TransmittanceMap(3, 4, 1.0), a), ShapeError);
}

TEST_CASE("recover inverts synthesize when t >= 0.1") {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const RgbImage j = test::random_image(6, 7, rng);
    const TransmittanceMap t = random_t(6, 7, rng, 0.1, 1.0);
    const Airlight a = random_airlight(rng);
    const RgbImage back = recover_radiance(synthesize_haze(j, t, a), t, a);
    for (std::size_t i = 0; i < j.samples().size(); ++i) {
      CHECK(std::abs(back.samples()[i] - j.samples()[i]) <= 1e-12);
    }
  }
}

TEST_SUITE_END();
