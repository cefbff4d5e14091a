#include <benchmark/benchmark.h>

#include <vector>

#include "rrw/chain.hpp"
#include "rrw/continuum.hpp"
#include "rrw/qstats.hpp"
#include "rrw/specfun.hpp"

namespace {

// Master Equation kernel: L sites advanced L^2 steps.
void BM_ReturnDistribution(benchmark::State& state) {
  const long size = state.range(0);
  const rrw::chain::WalkSpec spec(1.0, size);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rrw::chain::return_distribution(spec, size * size));
  }
  state.SetItemsProcessed(state.iterations() * size * size * size);
  state.SetLabel("items = site updates");
}
BENCHMARK(BM_ReturnDistribution)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_MeanReturn(benchmark::State& state) {
  const rrw::chain::WalkSpec spec(1.0, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rrw::chain::mean_return_exact(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MeanReturn)->Arg(1 << 10)->Arg(1 << 16);

void BM_Simulate(benchmark::State& state) {
  const rrw::chain::WalkSpec spec(1.0, 100);
  const long walkers = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rrw::chain::simulate_walkers(spec, walkers, 100000, 7));
  }
  state.SetItemsProcessed(state.iterations() * walkers);
}
BENCHMARK(BM_Simulate)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

void BM_BesselJ(benchmark::State& state) {
  const double x = static_cast<double>(state.range(0)) / 10.0;
  double nu = 0.8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rrw::specfun::bessel_j(nu, x));
    benchmark::ClobberMemory();
  }
}
// Arguments chosen to land in the series, recurrence and Hankel regions.
BENCHMARK(BM_BesselJ)->Arg(5)->Arg(150)->Arg(5000);

void BM_BesselZeros(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(rrw::specfun::bessel_zeros(-1.0 / 3.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_BesselZeros)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ContinuumSeries(benchmark::State& state) {
  const long size = 1000;
  const rrw::continuum::ContinuumModel model(1.0, size, 1000);
  for (auto _ : state) benchmark::DoNotOptimize(model.return_series(state.range(0)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ContinuumSeries)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_TailAndFit(benchmark::State& state) {
  const long size = 300;
  const auto series = rrw::chain::return_distribution(rrw::chain::WalkSpec(1.0, size), 10 * size * size);
  for (auto _ : state) benchmark::DoNotOptimize(rrw::qstats::analyse_series(1.0, size, series));
}
BENCHMARK(BM_TailAndFit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
