#include <benchmark/benchmark.h>

#include <vector>

#include "temviro/model.hpp"
#include "temviro/ops.hpp"
#include "temviro/parallel.hpp"
#include "temviro/preprocess.hpp"
#include "temviro/rng.hpp"

using namespace temviro;

namespace {

nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed, bool grad = false) {
  Xoshiro256 rng(seed);
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return nn::Tensor::from(std::move(shape), std::move(v), grad);
}

FeatureMap random_map(std::size_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  FeatureMap m(n, n);
  for (auto& v : m.values) v = rng.uniform();
  return m;
}

// First layer of either branch: [B, 1, 128, 128] * 16 filters.
void BM_Conv2dForward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  auto x = random_tensor({b, 1, 128, 128}, 1);
  auto w = random_tensor({16, 1, 3, 3}, 2);
  auto bias = random_tensor({16}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, bias));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_Conv2dForward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

// Second conv layer with backward: [B, 16, 42, 42] * 32 filters.
void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  auto x = random_tensor({b, 16, 42, 42}, 4, true);
  auto w = random_tensor({32, 16, 3, 3}, 5, true);
  auto bias = random_tensor({32}, 6, true);
  for (auto _ : state) {
    auto y = nn::sum(nn::conv2d(x, w, bias));
    y.backward();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Dense(benchmark::State& state) {
  auto x = random_tensor({32, 1728}, 7);
  auto w = random_tensor({1728, 512}, 8);
  auto b = random_tensor({512}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(nn::dense(x, w, b, nn::Activation::relu));
}
BENCHMARK(BM_Dense)->Unit(benchmark::kMicrosecond);

void BM_Dct2(benchmark::State& state) {
  const auto img = random_map(static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(dct2(img));
}
BENCHMARK(BM_Dct2)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_StdFilter(benchmark::State& state) {
  const auto img = random_map(128, 11);
  const FilterSpec spec{static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(local_std_filter(img, spec));
}
BENCHMARK(BM_StdFilter)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_FusedInference(benchmark::State& state) {
  Model model(default_arch_config(), 1);
  const auto b = static_cast<std::size_t>(state.range(0));
  auto x1 = random_tensor({b, 1, 128, 128}, 12);
  auto x2 = random_tensor({b, 1, 128, 128}, 13);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x1, x2, nn::Mode::infer, nullptr));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_FusedInference)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
