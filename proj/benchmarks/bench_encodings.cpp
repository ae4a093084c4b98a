#include <benchmark/benchmark.h>

#include <map>

#include "geohealth/encodings.hpp"
#include "geohealth/synth.hpp"

using namespace geohealth;

namespace {

const synth::SynthData& grid(int side) {
  static std::map<int, synth::SynthData> cache;
  auto it = cache.find(side);
  if (it != cache.end()) return it->second;
  synth::SynthConfig c;
  c.grid_rows = c.grid_cols = side;
  return cache.emplace(side, synth::generate(c)).first->second;
}

void BM_SpectralPE(benchmark::State& state) {
  const auto& d = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(laplacian_spectral_pe(d.graph, 8));
  state.SetComplexityN(static_cast<std::int64_t>(d.graph.size()));
}
BENCHMARK(BM_SpectralPE)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond)->Complexity();

void BM_RandomWalkPE(benchmark::State& state) {
  const auto& d = grid(40);
  for (auto _ : state) benchmark::DoNotOptimize(random_walk_pe(d.graph, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_RandomWalkPE)->Arg(1)->Arg(8)->Arg(16);

void BM_LaplacianSmooth(benchmark::State& state) {
  const auto& d = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(laplacian_smooth(d.graph, d.features.values));
}
BENCHMARK(BM_LaplacianSmooth)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_PcaReduce(benchmark::State& state) {
  NodeEncoding e;
  e.values = grid(40).features.values;
  for (auto _ : state) benchmark::DoNotOptimize(pca_reduce(e, 3));
}
BENCHMARK(BM_PcaReduce);

}  // namespace

BENCHMARK_MAIN();
