#include <benchmark/benchmark.h>

#include <map>

#include "geohealth/geo_graph.hpp"
#include "geohealth/nn/model.hpp"
#include "geohealth/synth.hpp"

using namespace geohealth;

namespace {

struct Fixture {
  synth::SynthData data;
  nn::MessageGraph graph;
  Mask mask;
};

const Fixture& fixture(int hops) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(hops);
  if (it != cache.end()) return it->second;
  synth::SynthConfig c;
  c.grid_rows = c.grid_cols = 20;
  c.n_features = 8;
  c.seed = 3;
  Fixture f{synth::generate(c), {}, {}};
  f.graph = nn::make_message_graph(hops > 1 ? khop_expand(f.data.graph, hops) : f.data.graph);
  f.mask.assign(f.data.graph.size(), true);
  return cache.emplace(hops, std::move(f)).first->second;
}

nn::ModelSpec spec_for(std::int64_t arch) {
  nn::ModelSpec s;
  s.architecture = nn::kAllArchitectures[arch];
  return s;
}

void BM_Forward(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(1)));
  const nn::ModelSpec spec = spec_for(state.range(0));
  const auto params = nn::init_parameters(spec, f.data.features.cols(), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        nn::evaluate_loss(spec, params, f.graph, f.data.features.values, f.data.target.values, f.mask, false));
  state.SetLabel(std::string(nn::to_string(spec.architecture)) + " edges=" + std::to_string(f.graph.edge_source.size()));
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1, 2, 3}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(1)));
  const nn::ModelSpec spec = spec_for(state.range(0));
  const auto params = nn::init_parameters(spec, f.data.features.cols(), 1);
  Rng rng(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(nn::loss_and_gradients(spec, params, f.graph, f.data.features.values,
                                                    f.data.target.values, f.mask, &rng, false));
  state.SetLabel(std::string(nn::to_string(spec.architecture)) + " edges=" + std::to_string(f.graph.edge_source.size()));
}
BENCHMARK(BM_ForwardBackward)->ArgsProduct({{0, 1, 2, 3}, {1, 2}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
