// Serial reference kernels against the OpenMP kernels on ResNet-50 layer
// shapes. Counters report multiply-accumulates per second.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dctnet/tensor/kernels.hpp"

namespace k = dctnet::kernels;

namespace {

std::vector<float> random_vector(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(-1.f, 1.f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Layer shapes: {batch, in channels, size, filters, kernel, stride, pad}.
struct ConvCase {
  int n, c, hw, f, ksize, stride, pad;
};
const ConvCase kConvCases[] = {
    {1, 192, 28, 128, 1, 1, 0},   // CCPP reducer into stage 3
    {8, 64, 28, 64, 3, 1, 1},     // stage 2 3x3 at the DCT grid
    {8, 256, 14, 256, 3, 1, 1},   // stage 4 3x3
    {8, 512, 7, 2048, 1, 1, 0},   // stage 5 expansion
    {2, 3, 112, 64, 7, 2, 3},     // RGB stem
};

template <bool Parallel>
void BM_Conv2dForward(benchmark::State& state) {
  const auto& cc = kConvCases[state.range(0)];
  k::ConvGeometry g{cc.n, cc.c, cc.hw, cc.hw, cc.f, cc.ksize, cc.ksize, cc.stride, cc.pad, 0, 0};
  k::make_conv_geometry(g);
  const auto x = random_vector(size_t(g.n) * g.c * g.h * g.w, 1);
  const auto w = random_vector(size_t(g.f) * g.patch(), 2);
  const auto b = random_vector(size_t(g.f), 3);
  std::vector<float> y(size_t(g.n) * g.f * g.out_plane());
  for (auto _ : state) {
    if constexpr (Parallel)
      k::parallel::conv2d_forward(g, x.data(), w.data(), b.data(), y.data());
    else
      k::reference::conv2d_forward(g, x.data(), w.data(), b.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
  const double macs = double(g.n) * g.f * g.patch() * g.out_plane();
  state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}

template <bool Parallel>
void BM_Conv2dBackward(benchmark::State& state) {
  const auto& cc = kConvCases[state.range(0)];
  k::ConvGeometry g{cc.n, cc.c, cc.hw, cc.hw, cc.f, cc.ksize, cc.ksize, cc.stride, cc.pad, 0, 0};
  k::make_conv_geometry(g);
  const auto x = random_vector(size_t(g.n) * g.c * g.h * g.w, 1);
  const auto w = random_vector(size_t(g.f) * g.patch(), 2);
  const auto dy = random_vector(size_t(g.n) * g.f * g.out_plane(), 3);
  std::vector<float> dx(x.size()), dw(w.size()), db(size_t(g.f));
  for (auto _ : state) {
    if constexpr (Parallel)
      k::parallel::conv2d_backward(g, x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data());
    else
      k::reference::conv2d_backward(g, x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data());
    benchmark::DoNotOptimize(dx.data());
  }
  const double macs = 2.0 * g.n * g.f * g.patch() * g.out_plane();
  state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const int m = int(state.range(0)), n = int(state.range(1)), kk = int(state.range(2));
  const auto a = random_vector(size_t(m) * kk, 1);
  const auto b = random_vector(size_t(kk) * n, 2);
  std::vector<float> c(size_t(m) * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::parallel::gemm(false, false, m, n, kk, a.data(), b.data(), c.data(), false);
    else
      k::reference::gemm(false, false, m, n, kk, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["MAC/s"] = benchmark::Counter(double(m) * n * kk, benchmark::Counter::kIsIterationInvariantRate);
}

void conv_cases(benchmark::internal::Benchmark* b) {
  for (int i = 0; i < int(std::size(kConvCases)); ++i) b->Arg(i);
  b->Unit(benchmark::kMillisecond);
}

void gemm_cases(benchmark::internal::Benchmark* b) {
  b->Args({64, 784, 192})->Args({256, 196, 2304})->Args({2048, 49, 512})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_Conv2dForward, false)->Apply(conv_cases)->Name("conv2d_forward/reference");
BENCHMARK_TEMPLATE(BM_Conv2dForward, true)->Apply(conv_cases)->Name("conv2d_forward/parallel");
BENCHMARK_TEMPLATE(BM_Conv2dBackward, false)->Apply(conv_cases)->Name("conv2d_backward/reference");
BENCHMARK_TEMPLATE(BM_Conv2dBackward, true)->Apply(conv_cases)->Name("conv2d_backward/parallel");
BENCHMARK_TEMPLATE(BM_Gemm, false)->Apply(gemm_cases)->Name("gemm/reference");
BENCHMARK_TEMPLATE(BM_Gemm, true)->Apply(gemm_cases)->Name("gemm/parallel");

BENCHMARK_MAIN();
