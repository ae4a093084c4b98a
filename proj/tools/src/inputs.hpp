#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geohealth/features.hpp"
#include "geohealth/geo_graph.hpp"
#include "run_context.hpp"

namespace geohealth::cli {

struct GraphInputs {
  std::string regions;
  std::string graph;         ///< edge list; empty means derive from regions
  std::string method = "contiguity";
  int k = 8;
  int graph_hops = 1;
};

/// Base graph from an edge list or built from the regions, then expanded to
/// `graph_hops` when above 1.
RegionGraph load_region_graph(RunContext& ctx, const GraphInputs& in);

std::vector<std::string> region_ids(const RegionGraph& graph);

/// Numeric table aligned to the graph; invalid rows are kept as zeros.
FeatureTable load_features(RunContext& ctx, const std::string& path, const RegionGraph& graph);

/// Outcome aligned to the graph; unobserved regions (and regions whose
/// feature row is invalid) become NaN.
Vector load_outcome(RunContext& ctx, const std::string& path, const std::string& outcome, const RegionGraph& graph,
                    const Mask& valid_rows = {});

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace geohealth::cli
