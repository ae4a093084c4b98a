#include <benchmark/benchmark.h>

#include "geohealth/baselines.hpp"
#include "geohealth/features.hpp"
#include "geohealth/synth.hpp"

using namespace geohealth;

namespace {

synth::SynthData data(int side) {
  synth::SynthConfig c;
  c.grid_rows = c.grid_cols = side;
  c.n_features = 4;
  c.outcome.beta = {1.0, -0.5, 0.8, 0.2};
  c.outcome.rho = 0.4;
  c.seed = 9;
  return synth::generate(c);
}

void BM_Ols(benchmark::State& state) {
  const auto d = data(40);
  for (auto _ : state) benchmark::DoNotOptimize(baselines::ols_fit(d.features.values, d.target.values));
}
BENCHMARK(BM_Ols);

void BM_Slm(benchmark::State& state) {
  const auto d = data(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(baselines::slm_fit(d.graph, d.features.values, d.target.values));
}
BENCHMARK(BM_Slm)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_GwrFixedBandwidth(benchmark::State& state) {
  const auto d = data(static_cast<int>(state.range(0)));
  baselines::GwrConfig c;
  c.bandwidth = 0.2;
  const auto locs = baselines::centroids(d.graph);
  for (auto _ : state)
    benchmark::DoNotOptimize(baselines::gwr_fit_predict(locs, d.features.values, d.target.values, c));
}
BENCHMARK(BM_GwrFixedBandwidth)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_VifSelect(benchmark::State& state) {
  synth::SynthConfig c;
  c.grid_rows = c.grid_cols = 20;
  c.n_features = static_cast<int>(state.range(0));
  c.collinear_pairs = {{0, 0.001}, {1, 0.001}};
  const auto d = synth::generate(c);
  for (auto _ : state) benchmark::DoNotOptimize(vif_select(d.features));
}
BENCHMARK(BM_VifSelect)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
