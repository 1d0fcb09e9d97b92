// Parallel kernels vs the serial reference on block-sized workloads.
// Build with -DCMAKE_BUILD_TYPE=Release; run ./bench/vidperf_bench.
#include <benchmark/benchmark.h>

#include "vidperf/kernels.hpp"
#include "vidperf/ref_kernels.hpp"
#include "vidperf/tensor.hpp"

using namespace vidperf;

namespace {

struct ConvSetup {
  Tensor5D x;
  ConvWeights w;
  ConvGeometry g;
};

ConvSetup conv_setup(Shape5D in, std::int64_t c_out, ConvGeometry g) {
  ConvSetup s{random_normal(in, 1), ConvWeights::zeros(c_out, in.c, g.kernel), g};
  Tensor5D fill = random_normal(Shape5D{1, 1, 1, 1, s.w.weight_count()}, 2);
  std::copy(fill.data().begin(), fill.data().end(), s.w.w.begin());
  return s;
}

// A res4-sized slice of the tsm backbone: 8 frames of 256 channels at 14x14.
ConvSetup res4_2d() {
  return conv_setup({1, 8, 256, 14, 14}, 256, {{1, 3, 3}, {1, 1, 1}, {0, 1, 1}});
}

// The inflated variant with a temporal kernel of 3.
ConvSetup res4_3d() {
  return conv_setup({1, 8, 256, 14, 14}, 256, {{3, 3, 3}, {1, 1, 1}, {1, 1, 1}});
}

void bm_conv2d_omp(benchmark::State& state) {
  ConvSetup s = res4_2d();
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(s.x, s.w, s.g));
}

void bm_conv2d_ref(benchmark::State& state) {
  ConvSetup s = res4_2d();
  for (auto _ : state) benchmark::DoNotOptimize(ref::conv_forward(s.x, s.w, s.g));
}

void bm_conv3d_omp(benchmark::State& state) {
  ConvSetup s = res4_3d();
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(s.x, s.w, s.g));
}

void bm_conv3d_ref(benchmark::State& state) {
  ConvSetup s = res4_3d();
  for (auto _ : state) benchmark::DoNotOptimize(ref::conv_forward(s.x, s.w, s.g));
}

void bm_conv2d_backward(benchmark::State& state) {
  ConvSetup s = res4_2d();
  Tensor5D grad = random_normal(conv_forward(s.x, s.w, s.g).shape(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv_backward(s.x, s.w, s.g, grad));
}

void bm_shift_omp(benchmark::State& state) {
  Tensor5D x = random_normal({1, 8, 256, 56, 56}, 4);
  ShiftConfig cfg = ShiftConfig::symmetric(Rational{1, 8});
  for (auto _ : state) benchmark::DoNotOptimize(temporal_shift(x, cfg));
}

void bm_shift_ref(benchmark::State& state) {
  Tensor5D x = random_normal({1, 8, 256, 56, 56}, 4);
  ShiftConfig cfg = ShiftConfig::symmetric(Rational{1, 8});
  for (auto _ : state) benchmark::DoNotOptimize(ref::temporal_shift(x, cfg));
}

void bm_maxpool_omp(benchmark::State& state) {
  Tensor5D x = random_normal({1, 8, 64, 112, 112}, 5);
  ConvGeometry g{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
  for (auto _ : state) benchmark::DoNotOptimize(max_pool_forward(x, g));
}

void bm_maxpool_ref(benchmark::State& state) {
  Tensor5D x = random_normal({1, 8, 64, 112, 112}, 5);
  ConvGeometry g{{1, 3, 3}, {1, 2, 2}, {0, 1, 1}};
  for (auto _ : state) benchmark::DoNotOptimize(ref::max_pool_forward(x, g));
}

BENCHMARK(bm_conv2d_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv2d_ref)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv3d_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv3d_ref)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_conv2d_backward)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_shift_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_shift_ref)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_maxpool_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_maxpool_ref)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
