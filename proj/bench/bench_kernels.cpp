// Parallel kernels against their serial reference versions.

#include <benchmark/benchmark.h>

#include "polythresh/polytope_sim.hpp"

using namespace polythresh;

namespace {

void BM_Estimate(benchmark::State& state, bool parallel) {
  const MeasureSpec spec = MeasureSpec::uniform(1.0);
  const int n = static_cast<int>(state.range(0));
  const auto hull = draw_hull(spec, n, static_cast<std::size_t>(state.range(1)), SeedKey{1, 1});
  for (auto _ : state) {
    const auto r = parallel ? estimate_measure(spec, hull, 500, 2) : reference::estimate_measure(spec, hull, 500, 2);
    benchmark::DoNotOptimize(r.hits);
  }
  state.SetItemsProcessed(state.iterations() * 500);
}

void BM_Sweep(benchmark::State& state, bool parallel) {
  const MeasureSpec spec = MeasureSpec::uniform(1.0);
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> rho = {0.3, 0.6, 0.9, 1.2};
  for (auto _ : state) {
    const auto g = parallel ? sweep(spec, n, rho, 2, 200, 3) : reference::sweep(spec, n, rho, 2, 200, 3);
    benchmark::DoNotOptimize(g.rows.back().mean);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Estimate, parallel, true)->Args({4, 2000})->Args({8, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Estimate, reference, false)->Args({4, 2000})->Args({8, 20000})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, parallel, true)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, reference, false)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
