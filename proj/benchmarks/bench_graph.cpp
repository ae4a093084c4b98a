#include <benchmark/benchmark.h>

#include "geohealth/geo_graph.hpp"
#include "geohealth/synth.hpp"

using namespace geohealth;

namespace {

std::vector<Region> grid_regions(int side) {
  synth::SynthConfig c;
  c.grid_rows = c.grid_cols = side;
  c.n_features = 1;
  return synth::generate(c).regions;
}

void BM_Contiguity(benchmark::State& state) {
  const auto regions = grid_regions(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_contiguity_graph(regions));
  state.SetComplexityN(static_cast<std::int64_t>(regions.size()));
}
BENCHMARK(BM_Contiguity)->Arg(10)->Arg(20)->Arg(40)->Complexity();

void BM_Knn(benchmark::State& state) {
  const auto regions = grid_regions(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(regions, 8));
  state.SetComplexityN(static_cast<std::int64_t>(regions.size()));
}
BENCHMARK(BM_Knn)->Arg(10)->Arg(20)->Arg(40)->Arg(70)->Complexity();

void BM_Khop(benchmark::State& state) {
  const RegionGraph g = build_contiguity_graph(grid_regions(40));
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(khop_expand(g, k));
}
BENCHMARK(BM_Khop)->DenseRange(1, 4);

void BM_Buffer(benchmark::State& state) {
  const RegionGraph g = build_contiguity_graph(grid_regions(40));
  NodeSet test;
  for (Index i = 0; i < static_cast<Index>(g.size()); i += 10) test.push_back(i);
  for (auto _ : state) benchmark::DoNotOptimize(subgraph_with_buffer(g, test, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Buffer)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
