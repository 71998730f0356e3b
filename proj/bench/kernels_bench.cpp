// Optimized kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "dehaze/kernels.hpp"
#include "dehaze/nn/train.hpp"
#include "dehaze/patches.hpp"
#include "dehaze/random.hpp"

using namespace dehaze;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Largest conv in the network: 7x7, 8 -> 8 channels on a 15x15 patch.
const kernels::ConvShape kConv{8, 8, 7, 15, 15};

void BM_ConvForward(benchmark::State& state) {
  Rng rng(1);
  const auto in = random_vec(kConv.in_channels * kConv.pixels(), rng);
  const auto w = random_vec(kConv.weight_count(), rng);
  const auto b = random_vec(kConv.out_channels, rng);
  std::vector<double> out(kConv.out_channels * kConv.pixels());
  kernels::ConvScratch scratch;
  for (auto _ : state) {
    kernels::conv2d_forward(kConv, in, w, b, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ConvForward);

void BM_ConvForwardReference(benchmark::State& state) {
  Rng rng(1);
  const auto in = random_vec(kConv.in_channels * kConv.pixels(), rng);
  const auto w = random_vec(kConv.weight_count(), rng);
  const auto b = random_vec(kConv.out_channels, rng);
  std::vector<double> out(kConv.out_channels * kConv.pixels());
  for (auto _ : state) {
    kernels::reference::conv2d_forward(kConv, in, w, b, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ConvForwardReference);

void BM_ConvBackward(benchmark::State& state) {
  Rng rng(2);
  const auto in = random_vec(kConv.in_channels * kConv.pixels(), rng);
  const auto w = random_vec(kConv.weight_count(), rng);
  const auto gy = random_vec(kConv.out_channels * kConv.pixels(), rng);
  std::vector<double> gx(in.size()), gw(w.size()), gb(kConv.out_channels);
  kernels::ConvScratch scratch;
  for (auto _ : state) {
    kernels::conv2d_backward(kConv, in, w, gy, gx, gw, gb, scratch);
    benchmark::DoNotOptimize(gx.data());
  }
}
BENCHMARK(BM_ConvBackward);

void BM_ConvBackwardReference(benchmark::State& state) {
  Rng rng(2);
  const auto in = random_vec(kConv.in_channels * kConv.pixels(), rng);
  const auto w = random_vec(kConv.weight_count(), rng);
  const auto gy = random_vec(kConv.out_channels * kConv.pixels(), rng);
  std::vector<double> gx(in.size()), gw(w.size()), gb(kConv.out_channels);
  for (auto _ : state) {
    kernels::reference::conv2d_backward(kConv, in, w, gy, gx, gw, gb);
    benchmark::DoNotOptimize(gx.data());
  }
}
BENCHMARK(BM_ConvBackwardReference);

template <bool kFast>
void BM_DenseForward(benchmark::State& state) {
  const std::size_t n = 16 * 225, m = 40;
  Rng rng(3);
  const auto in = random_vec(n, rng), w = random_vec(n * m, rng), b = random_vec(m, rng);
  std::vector<double> out(m);
  for (auto _ : state) {
    if constexpr (kFast) {
      kernels::dense_forward(n, m, in, w, b, out);
    } else {
      kernels::reference::dense_forward(n, m, in, w, b, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_DenseForward<true>)->Name("BM_DenseForward");
BENCHMARK(BM_DenseForward<false>)->Name("BM_DenseForwardReference");

template <bool kFast>
void BM_ApplySystem(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const auto t = random_vec(side * side, rng, 0.0, 1.0);
  std::vector<double> mask(side * side);
  for (double& m : mask) m = rng.uniform() < 0.3 ? 1.0 : 0.0;
  const auto wr = random_vec(side * (side - 1), rng, 0.1, 100.0);
  const auto wd = random_vec((side - 1) * side, rng, 0.1, 100.0);
  std::vector<double> out(side * side);
  for (auto _ : state) {
    if constexpr (kFast) {
      kernels::apply_system(side, side, t, mask, wr, wd, 0.01, out);
    } else {
      kernels::reference::apply_system(side, side, t, mask, wr, wd, 0.01, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * side * side));
}
BENCHMARK(BM_ApplySystem<true>)->Name("BM_ApplySystem")->Arg(256)->Arg(1024);
BENCHMARK(BM_ApplySystem<false>)->Name("BM_ApplySystemReference")->Arg(256)->Arg(1024);

template <bool kFast>
void BM_Footprints(benchmark::State& state) {
  const std::size_t side = 512;
  const std::vector<PatchOrigin> origins = patch_origins(side, side);
  Rng rng(5);
  const auto values = random_vec(origins.size(), rng, 0.0, 1.0);
  std::vector<double> sum(side * side), count(side * side);
  for (auto _ : state) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
    if constexpr (kFast) {
      kernels::accumulate_footprints(origins, values, kPatchSize, side, side, sum, count);
    } else {
      kernels::reference::accumulate_footprints(origins, values, kPatchSize, side, side, sum, count);
    }
    benchmark::DoNotOptimize(sum.data());
  }
}
BENCHMARK(BM_Footprints<true>)->Name("BM_Footprints");
BENCHMARK(BM_Footprints<false>)->Name("BM_FootprintsReference");

// Mean gradient over a batch; scales with OMP_NUM_THREADS.
void BM_BatchGradient(benchmark::State& state) {
  Rng rng(6);
  std::vector<PatchSample> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) {
    s.pixels = random_vec(3 * kPatchSize * kPatchSize, rng, 0.0, 1.0);
    s.label = PatchLabel{rng.uniform(0.3, 1.0), Airlight(0.9, 0.9, 0.9)};
  }
  std::vector<const PatchSample*> batch;
  for (const auto& s : samples) batch.push_back(&s);
  const auto params = nn::NetworkParams::initialized(1);
  std::vector<double> gradient(params.values.size());
  for (auto _ : state) benchmark::DoNotOptimize(nn::batch_gradient(params, batch, gradient));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * samples.size()));
}
BENCHMARK(BM_BatchGradient)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
