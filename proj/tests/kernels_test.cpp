#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "dehaze/kernels.hpp"
#include "support.hpp"

using namespace dehaze;
using namespace dehaze::kernels;

TEST_SUITE_BEGIN("kernels");

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Loss L = sum(out * probe) for a conv layer; used for finite differences.
double conv_probe_loss(const ConvShape& s, const std::vector<double>& in,
                       const std::vector<double>& w, const std::vector<double>& b,
                       const std::vector<double>& probe) {
  std::vector<double> out(s.out_channels * s.pixels());
  reference::conv2d_forward(s, in, w, b, out);
  double l = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) l += out[i] * probe[i];
  return l;
}

struct ThreadCount {
  explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("conv forward: fast path matches reference and a naive oracle") {
  Rng rng(1);
  for (const ConvShape s : {ConvShape{3, 8, 1, 15, 15}, ConvShape{8, 8, 5, 15, 15},
                            ConvShape{24, 8, 3, 15, 15}, ConvShape{8, 16, 7, 9, 11},
                            ConvShape{1, 1, 3, 5, 5}}) {
    const auto in = random_vec(s.in_channels * s.pixels(), rng);
    const auto w = random_vec(s.weight_count(), rng);
    const auto b = random_vec(s.out_channels, rng);
    std::vector<double> fast(s.out_channels * s.pixels()), ref(fast.size()), naive(fast.size());
    ConvScratch scratch;
    conv2d_forward(s, in, w, b, fast, scratch);
    reference::conv2d_forward(s, in, w, b, ref);

    const auto k = static_cast<long>(s.kernel), pad = static_cast<long>(s.pad());
    const auto H = static_cast<long>(s.height), W = static_cast<long>(s.width);
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      for (long y = 0; y < H; ++y) {
        for (long x = 0; x < W; ++x) {
          double acc = b[o];
          for (std::size_t i = 0; i < s.in_channels; ++i) {
            for (long dy = 0; dy < k; ++dy) {
              for (long dx = 0; dx < k; ++dx) {
                const long yy = y + dy - pad, xx = x + dx - pad;
                if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                acc += w[((o * s.in_channels + i) * k + dy) * k + dx] *
                       in[(i * H + yy) * W + xx];
              }
            }
          }
          naive[(o * H + y) * W + x] = acc;
        }
      }
    }
    CHECK(max_abs_diff(ref, naive) < 1e-12);
    CHECK(max_abs_diff(fast, naive) < 1e-12);
  }
}

TEST_CASE("conv backward: fast path matches reference, reference matches finite differences") {
  Rng rng(2);
  for (const ConvShape s : {ConvShape{3, 4, 1, 6, 7}, ConvShape{4, 3, 3, 6, 5},
                            ConvShape{2, 3, 5, 7, 7}, ConvShape{24, 8, 3, 15, 15}}) {
    const auto in = random_vec(s.in_channels * s.pixels(), rng);
    const auto w = random_vec(s.weight_count(), rng);
    const auto b = random_vec(s.out_channels, rng);
    const auto gout = random_vec(s.out_channels * s.pixels(), rng);

    std::vector<double> gi_f(in.size()), gw_f(w.size(), 0.5), gb_f(b.size(), 0.25);
    std::vector<double> gi_r(in.size()), gw_r(w.size(), 0.5), gb_r(b.size(), 0.25);
    ConvScratch scratch;
    conv2d_backward(s, in, w, gout, gi_f, gw_f, gb_f, scratch);
    reference::conv2d_backward(s, in, w, gout, gi_r, gw_r, gb_r);
    CHECK(max_abs_diff(gi_f, gi_r) < 1e-11);
    CHECK(max_abs_diff(gw_f, gw_r) < 1e-11);
    CHECK(max_abs_diff(gb_f, gb_r) < 1e-11);

    if (s.in_channels * s.pixels() > 200) continue;
    // Gradients accumulate onto the 0.5 / 0.25 preloads.
    const double h = 1e-6;
    auto wp = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
      wp[i] = w[i] + h;
      const double lp = conv_probe_loss(s, in, wp, b, gout);
      wp[i] = w[i] - h;
      const double lm = conv_probe_loss(s, in, wp, b, gout);
      wp[i] = w[i];
      CHECK(std::abs((lp - lm) / (2 * h) - (gw_r[i] - 0.5)) < 1e-7);
    }
    auto ip = in;
    for (std::size_t i = 0; i < in.size(); ++i) {
      ip[i] = in[i] + h;
      const double lp = conv_probe_loss(s, ip, w, b, gout);
      ip[i] = in[i] - h;
      const double lm = conv_probe_loss(s, ip, w, b, gout);
      ip[i] = in[i];
      CHECK(std::abs((lp - lm) / (2 * h) - gi_r[i]) < 1e-7);
    }
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      double sum = 0.0;
      for (std::size_t p = 0; p < s.pixels(); ++p) sum += gout[o * s.pixels() + p];
      CHECK(std::abs(gb_r[o] - 0.25 - sum) < 1e-12);
    }
  }
}

TEST_CASE("conv backward with empty grad_input leaves only weight gradients") {
  Rng rng(3);
  const ConvShape s{3, 8, 5, 15, 15};
  const auto in = random_vec(s.in_channels * s.pixels(), rng);
  const auto w = random_vec(s.weight_count(), rng);
  const auto gout = random_vec(s.out_channels * s.pixels(), rng);
  std::vector<double> gw(w.size()), gb(8), gw2(w.size()), gb2(8), gi(in.size());
  ConvScratch scratch;
  conv2d_backward(s, in, w, gout, {}, gw, gb, scratch);
  conv2d_backward(s, in, w, gout, gi, gw2, gb2, scratch);
  CHECK(max_abs_diff(gw, gw2) == 0.0);
  CHECK(max_abs_diff(gb, gb2) == 0.0);
}

TEST_CASE("dense kernels match dot-product oracles") {
  Rng rng(4);
  const std::size_t n_in = 37, n_out = 5;
  const auto x = random_vec(n_in, rng);
  const auto w = random_vec(n_in * n_out, rng);
  const auto b = random_vec(n_out, rng);
  std::vector<double> y(n_out), yr(n_out);
  dense_forward(n_in, n_out, x, w, b, y);
  reference::dense_forward(n_in, n_out, x, w, b, yr);
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < n_in; ++i) acc += w[o * n_in + i] * x[i];
    CHECK(std::abs(y[o] - acc) < 1e-12);
    CHECK(std::abs(yr[o] - acc) < 1e-12);
  }

  const auto gy = random_vec(n_out, rng);
  std::vector<double> gx(n_in), gw(w.size(), 1.0), gb(n_out, 2.0);
  dense_backward(n_in, n_out, x, w, gy, gx, gw, gb);
  for (std::size_t i = 0; i < n_in; ++i) {
    double acc = 0.0;
    for (std::size_t o = 0; o < n_out; ++o) acc += w[o * n_in + i] * gy[o];
    CHECK(std::abs(gx[i] - acc) < 1e-12);
  }
  for (std::size_t o = 0; o < n_out; ++o) {
    CHECK(std::abs(gb[o] - 2.0 - gy[o]) < 1e-15);
    for (std::size_t i = 0; i < n_in; ++i) {
      CHECK(std::abs(gw[o * n_in + i] - 1.0 - gy[o] * x[i]) < 1e-12);
    }
  }
}

TEST_CASE("apply_system fast path equals reference bitwise") {
  Rng rng(5);
  const std::size_t h = 37, w = 29;
  const auto t = random_vec(h * w, rng, 0.0, 1.0);
  std::vector<double> mask(h * w);
  for (double& m : mask) m = rng.uniform() < 0.4 ? 1.0 : 0.0;
  const auto wr = random_vec(h * (w - 1), rng, 0.1, 100.0);
  const auto wd = random_vec((h - 1) * w, rng, 0.1, 100.0);
  std::vector<double> fast(h * w), ref(h * w);
  apply_system(h, w, t, mask, wr, wd, 0.03, fast);
  reference::apply_system(h, w, t, mask, wr, wd, 0.03, ref);
  CHECK(fast == ref);
}

TEST_CASE("accumulate_footprints fast path equals reference bitwise") {
  Rng rng(6);
  const std::size_t h = 60, w = 47, size = 15;
  std::vector<PatchOrigin> origins;
  std::vector<double> values;
  for (int i = 0; i < 80; ++i) {
    origins.push_back({rng.below(h - size + 1), rng.below(w - size + 1)});
    values.push_back(rng.uniform());
  }
  std::vector<double> s1(h * w), c1(h * w), s2(h * w), c2(h * w);
  accumulate_footprints(origins, values, size, h, w, s1, c1);
  reference::accumulate_footprints(origins, values, size, h, w, s2, c2);
  CHECK(s1 == s2);
  CHECK(c1 == c2);
}

TEST_CASE("kernels give identical results for any thread count") {
  Rng rng(7);
  const ConvShape s{8, 16, 5, 15, 15};
  const auto in = random_vec(s.in_channels * s.pixels(), rng);
  const auto w = random_vec(s.weight_count(), rng);
  const auto b = random_vec(s.out_channels, rng);
  const std::size_t h = 50, wd = 40;
  const auto t = random_vec(h * wd, rng);
  const std::vector<double> mask(h * wd, 1.0);
  const auto er = random_vec(h * (wd - 1), rng, 0.1, 1.0);
  const auto ed = random_vec((h - 1) * wd, rng, 0.1, 1.0);

  auto run = [&](int threads) {
    ThreadCount tc(threads);
    std::vector<double> out(s.out_channels * s.pixels()), sys(h * wd);
    ConvScratch scratch;
    conv2d_forward(s, in, w, b, out, scratch);
    apply_system(h, wd, t, mask, er, ed, 0.5, sys);
    out.insert(out.end(), sys.begin(), sys.end());
    return out;
  };
  const auto one = run(1);
  CHECK(run(3) == one);
  CHECK(run(8) == one);
}

TEST_SUITE_END();
