// Parallel (im2col + GEMM, OpenMP) kernels against the serial reference loops
// at the layer shapes of the default 64px model, batch 16.

#include <benchmark/benchmark.h>

#include <random>

#include "xgan/kernels.hpp"
#include "xgan/reference_kernels.hpp"

using namespace xgan;

namespace {

Tensor<float> filled(int n, int c, int h, int w, unsigned seed) {
  Tensor<float> t(n, c, h, w);
  std::mt19937 rng(seed);
  std::normal_distribution<float> d(0.0f, 0.5f);
  for (auto& v : t.data) v = d(rng);
  return t;
}

struct ConvCase {
  int cin, cout, size;
};

// Encoder conv1..conv4 of the default model.
const ConvCase kConv[] = {{3, 32, 64}, {32, 64, 32}, {64, 128, 16}, {128, 256, 8}};
// Decoder deconv2..deconv5.
const ConvCase kDeconv[] = {{512, 256, 4}, {256, 128, 8}, {128, 64, 16}, {64, 3, 32}};
constexpr int kBatch = 16;

template <bool Parallel>
void BM_ConvForward(benchmark::State& st) {
  const auto c = kConv[st.range(0)];
  auto x = filled(kBatch, c.cin, c.size, c.size, 1), w = filled(c.cout, c.cin, 4, 4, 2), b = filled(c.cout, 1, 1, 1, 3);
  Tensor<float> y;
  for (auto _ : st) {
    if constexpr (Parallel) kernels::conv2d_forward(x, w, b, y);
    else reference::conv2d_forward(x, w, b, y);
    benchmark::DoNotOptimize(y.data.data());
  }
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& st) {
  const auto c = kConv[st.range(0)];
  auto x = filled(kBatch, c.cin, c.size, c.size, 1), w = filled(c.cout, c.cin, 4, 4, 2);
  auto dy = filled(kBatch, c.cout, c.size / 2, c.size / 2, 4);
  Tensor<float> dx, dw(c.cout, c.cin, 4, 4), db(c.cout, 1);
  for (auto _ : st) {
    if constexpr (Parallel) kernels::conv2d_backward(x, w, dy, &dx, &dw, &db);
    else reference::conv2d_backward(x, w, dy, &dx, &dw, &db);
    benchmark::DoNotOptimize(dx.data.data());
  }
}

template <bool Parallel>
void BM_DeconvForward(benchmark::State& st) {
  const auto c = kDeconv[st.range(0)];
  auto x = filled(kBatch, c.cin, c.size, c.size, 1), w = filled(c.cin, c.cout, 4, 4, 2), b = filled(c.cout, 1, 1, 1, 3);
  Tensor<float> y;
  for (auto _ : st) {
    if constexpr (Parallel) kernels::deconv2d_forward(x, w, b, y);
    else reference::deconv2d_forward(x, w, b, y);
    benchmark::DoNotOptimize(y.data.data());
  }
}

template <bool Parallel>
void BM_LinearForward(benchmark::State& st) {
  const int in = static_cast<int>(st.range(0)), out = static_cast<int>(st.range(1));
  auto x = filled(kBatch, in, 1, 1, 1), w = filled(out, in, 1, 1, 2), b = filled(out, 1, 1, 1, 3);
  Tensor<float> y;
  for (auto _ : st) {
    if constexpr (Parallel) kernels::linear_forward(x, w, b, y);
    else reference::linear_forward(x, w, b, y);
    benchmark::DoNotOptimize(y.data.data());
  }
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/parallel")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/parallel")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeconvForward<false>)->Name("deconv_forward/reference")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeconvForward<true>)->Name("deconv_forward/parallel")->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearForward<false>)->Name("linear_forward/reference")->Args({4096, 1024})->Args({1024, 1024})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearForward<true>)->Name("linear_forward/parallel")->Args({4096, 1024})->Args({1024, 1024})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
