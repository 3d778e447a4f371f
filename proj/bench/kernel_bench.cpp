// OpenMP kernels against their serial references at the default video size.

#include <benchmark/benchmark.h>

#include <vector>

#include "support/oracles.hpp"
#include "vattr/kernels.hpp"
#include "vattr/step.hpp"
#include "vattr/toy_model.hpp"

namespace vattr {
namespace {

const Shape3 kVideo{16, 64, 64};

void BM_BlurParallel(benchmark::State& st) {
  const VideoTensor x = testing::random_video(kVideo, 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(gaussian_blur2d(x, 10.0));
}
void BM_BlurSerial(benchmark::State& st) {
  const VideoTensor x = testing::random_video(kVideo, 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(serial::gaussian_blur2d(x, 10.0));
}

// The smoothness-loss convolution at its default kernel, full and strided.
void conv_args(benchmark::internal::Benchmark* b) { b->Arg(1)->Arg(11); }

void BM_Conv3dParallel(benchmark::State& st) {
  const Volume m = testing::random_volume(kVideo, 2);
  const Kernel3D k = ellipsoid_kernel(8, 11, 11);
  const auto s = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(conv3d(m, k, {1, s, s}, 0));
}
void BM_Conv3dSerial(benchmark::State& st) {
  const Volume m = testing::random_volume(kVideo, 2);
  const Kernel3D k = ellipsoid_kernel(8, 11, 11);
  const auto s = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(serial::conv3d(m, k, {1, s, s}, 0));
}

void BM_Conv3dAdjointParallel(benchmark::State& st) {
  const Kernel3D k = ellipsoid_kernel(8, 11, 11);
  const Volume g = testing::random_volume(conv3d_output_shape(kVideo, k.shape(), {1, 1, 1}, 0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(conv3d_adjoint(g, k, kVideo, {1, 1, 1}, 0));
}
void BM_Conv3dAdjointSerial(benchmark::State& st) {
  const Kernel3D k = ellipsoid_kernel(8, 11, 11);
  const Volume g = testing::random_volume(conv3d_output_shape(kVideo, k.shape(), {1, 1, 1}, 0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(serial::conv3d_adjoint(g, k, kVideo, {1, 1, 1}, 0));
}

void BM_UpsampleParallel(benchmark::State& st) {
  const Volume seed = testing::random_volume({16, 10, 10}, 4);
  for (auto _ : st) benchmark::DoNotOptimize(upsample_smooth(seed, 7, 3.5, 64, 64));
}
void BM_UpsampleSerial(benchmark::State& st) {
  const Volume seed = testing::random_volume({16, 10, 10}, 4);
  for (auto _ : st) benchmark::DoNotOptimize(serial::upsample_smooth(seed, 7, 3.5, 64, 64));
}

// First toy layer: 1 -> 8 channels on the full-resolution input.
struct ConvLayer {
  FeatureMap in{kVideo, 1, {}};
  std::vector<double> w, b;
  FeatureMap grad_out;
  ConvLayer() {
    const VideoTensor x = testing::random_video(kVideo, 1, 5);
    in.values.assign(x.values().begin(), x.values().end());
    const VideoTensor wv = testing::random_video({8, 27, 1}, 1, 6, -0.2, 0.2);
    w.assign(wv.values().begin(), wv.values().end());
    b.assign(8, 0.01);
    grad_out = layers::conv3_forward(in, w, b, 8);
  }
};

void BM_Conv3LayerParallel(benchmark::State& st) {
  const ConvLayer l;
  for (auto _ : st) benchmark::DoNotOptimize(layers::conv3_forward(l.in, l.w, l.b, 8));
}
void BM_Conv3LayerSerial(benchmark::State& st) {
  const ConvLayer l;
  for (auto _ : st) benchmark::DoNotOptimize(layers::serial::conv3_forward(l.in, l.w, l.b, 8));
}

void BM_Conv3BackwardParallel(benchmark::State& st) {
  const ConvLayer l;
  std::vector<double> gw(l.w.size()), gb(l.b.size());
  FeatureMap gi;
  for (auto _ : st) layers::conv3_backward(l.in, l.w, l.grad_out, &gi, gw, gb);
}
void BM_Conv3BackwardSerial(benchmark::State& st) {
  const ConvLayer l;
  std::vector<double> gw(l.w.size()), gb(l.b.size());
  FeatureMap gi;
  for (auto _ : st) layers::serial::conv3_backward(l.in, l.w, l.grad_out, &gi, gw, gb);
}

BENCHMARK(BM_BlurParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlurSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3dParallel)->Apply(conv_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3dSerial)->Apply(conv_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3dAdjointParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3dAdjointSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UpsampleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UpsampleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3LayerParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3LayerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3BackwardParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Conv3BackwardSerial)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace vattr

BENCHMARK_MAIN();
