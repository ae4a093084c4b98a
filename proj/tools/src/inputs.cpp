#include "inputs.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "geohealth/geo_io.hpp"

namespace geohealth::cli {

RegionGraph load_region_graph(RunContext& ctx, const GraphInputs& in) {
  std::vector<Region> regions = io::load_regions(ctx.input(in.regions));
  RegionGraph graph;
  if (!in.graph.empty()) {
    graph = io::load_graph(std::move(regions), ctx.input(in.graph));
  } else if (in.method == "contiguity") {
    graph = build_contiguity_graph(std::move(regions));
  } else if (in.method == "knn") {
    graph = knn_graph(std::move(regions), in.k);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown graph method '" + in.method + "'");
  }
  if (in.graph_hops < 1) throw Error(ErrorCode::InvalidConfig, "graph hops must be >= 1");
  if (in.graph_hops > 1) graph = khop_expand(graph, in.graph_hops);
  return graph;
}

std::vector<std::string> region_ids(const RegionGraph& graph) {
  std::vector<std::string> ids;
  ids.reserve(graph.size());
  for (const Region& r : graph.regions()) ids.push_back(r.id);
  return ids;
}

FeatureTable load_features(RunContext& ctx, const std::string& path, const RegionGraph& graph) {
  const std::vector<std::string> order = region_ids(graph);
  return load_feature_table(ctx.input(path), {}, &order, ctx.diag());
}

Vector load_outcome(RunContext& ctx, const std::string& path, const std::string& outcome, const RegionGraph& graph,
                    const Mask& valid_rows) {
  const TargetVector t = load_target(ctx.input(path), outcome, region_ids(graph), ctx.diag());
  Vector y = t.values;
  for (std::size_t i = 0; i < t.mask.size(); ++i)
    if (!t.mask[i] || (!valid_rows.empty() && !valid_rows[i]))
      y(static_cast<Index>(i)) = std::numeric_limits<double>::quiet_NaN();
  return y;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace geohealth::cli
