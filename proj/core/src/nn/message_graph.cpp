#include "geohealth/nn/message_graph.hpp"

#include <cmath>

namespace geohealth::nn {

SparseMatrix normalize_adjacency(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(graph.degree(i) + 1));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * graph.edge_count() + graph.size());
  for (Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, inv_sqrt(i) * inv_sqrt(i));
    for (Index j : graph.neighbors(i)) trip.emplace_back(i, j, inv_sqrt(i) * inv_sqrt(j));
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

MessageGraph make_message_graph(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  MessageGraph mg;
  mg.nodes = n;
  mg.normalized = SparseOperator(normalize_adjacency(graph));
  mg.adjacency = SparseOperator(graph.adjacency());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * graph.edge_count());
  for (Index i = 0; i < n; ++i) {
    const auto d = static_cast<double>(graph.degree(i));
    for (Index j : graph.neighbors(i)) trip.emplace_back(i, j, 1.0 / d);
  }
  SparseMatrix mean(n, n);
  mean.setFromTriplets(trip.begin(), trip.end());
  mg.mean = SparseOperator(std::move(mean));

  mg.offsets.reserve(graph.size() + 1);
  mg.offsets.push_back(0);
  for (Index i = 0; i < n; ++i) {
    // self loop first, then neighbours in ascending order
    mg.edge_target.push_back(i);
    mg.edge_source.push_back(i);
    for (Index j : graph.neighbors(i)) {
      mg.edge_target.push_back(i);
      mg.edge_source.push_back(j);
    }
    mg.offsets.push_back(static_cast<Index>(mg.edge_target.size()));
  }
  return mg;
}

}  // namespace geohealth::nn
