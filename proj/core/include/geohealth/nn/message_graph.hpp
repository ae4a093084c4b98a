#pragma once

#include "geohealth/geo_graph.hpp"
#include "geohealth/nn/tape.hpp"

namespace geohealth::nn {

/// D~^-1/2 (A + I) D~^-1/2 with D~ the degree matrix of A + I.
SparseMatrix normalize_adjacency(const RegionGraph& graph);

/// Per-graph operators cached for message passing.
struct MessageGraph {
  Index nodes = 0;
  SparseOperator normalized;  ///< GCN propagation
  SparseOperator adjacency;   ///< neighbour sums (GIN)
  SparseOperator mean;        ///< neighbour means, zero rows for isolated nodes (GraphSAGE)
  /// Attention support: every edge j -> i plus one self loop per node,
  /// grouped by target; edges of target i live in [offsets[i], offsets[i+1]).
  std::vector<Index> edge_target;
  std::vector<Index> edge_source;
  std::vector<Index> offsets;
};

MessageGraph make_message_graph(const RegionGraph& graph);

}  // namespace geohealth::nn
