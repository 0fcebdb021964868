#include <benchmark/benchmark.h>

#include "gibbsmix/chain.hpp"
#include "gibbsmix/density.hpp"
#include "gibbsmix/grid.hpp"

using namespace gibbsmix;

static void BM_NormalQuantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(normal_quantile(p));
    p = p < 0.999 ? p + 1e-3 : 1e-6;
  }
}
BENCHMARK(BM_NormalQuantile);

static void BM_TruncatedQuantile(benchmark::State& state) {
  const ModelParams params(50.0);
  double p = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(unit_conditional(0.3, params).quantile(p));
    p = p < 0.99 ? p + 0.01 : 0.001;
  }
}
BENCHMARK(BM_TruncatedQuantile);

static void BM_RunX(benchmark::State& state) {
  const ModelParams params(10.0);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_x({0.0, 0.0}, 1000, params, 1, SimOptions{false, stream++}));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RunX);

// One random-scan step on the 500 x 500 grid.
static void BM_OperatorStep(benchmark::State& state) {
  const ModelParams params(static_cast<double>(state.range(0)));
  const RandomScanOperator op(500, params);
  GridDistribution dist = GridDistribution::point_mass(500, {0.0, 0.0});
  dist = op.evolve(dist, 20);
  for (auto _ : state) {
    dist = op.apply(dist);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_OperatorStep)->Arg(10)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

static void BM_KernelPower(benchmark::State& state) {
  const auto kernel = build_kernel_1d(static_cast<std::size_t>(state.range(0)), ModelParams(10.0));
  for (auto _ : state) benchmark::DoNotOptimize(kernel.power(100));
}
BENCHMARK(BM_KernelPower)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
