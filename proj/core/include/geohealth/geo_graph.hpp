#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "geohealth/error.hpp"
#include "geohealth/types.hpp"

namespace geohealth {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed coordinate ring: front() == back().
using Ring = std::vector<Point>;

struct Region {
  std::string id;
  Point centroid;
  /// Outer rings and holes of all parts, in input order. The first ring is
  /// the outer ring of the first part.
  std::optional<std::vector<Ring>> boundary;
  std::optional<std::string> group;
};

/// Signed-area centroid of a closed ring (vertex mean when the area vanishes).
Point ring_centroid(const Ring& ring);

/// Throws DegenerateGeometry unless the ring is closed with >= 3 distinct vertices.
void validate_ring(const Ring& ring, const std::string& region_id);

/// Undirected simple graph over regions, stored as sorted adjacency lists.
/// Construction enforces symmetry, no self loops and no duplicate edges.
class RegionGraph {
 public:
  using Edge = std::pair<Index, Index>;

  RegionGraph() = default;
  /// Edges may be given in either or both directions; self loops are rejected.
  RegionGraph(std::vector<Region> regions, const std::vector<Edge>& edges);

  std::size_t size() const noexcept { return regions_.size(); }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  const Region& region(Index i) const { return regions_.at(static_cast<std::size_t>(i)); }

  std::span<const Index> neighbors(Index i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  std::size_t degree(Index i) const { return adjacency_.at(static_cast<std::size_t>(i)).size(); }
  bool has_edge(Index i, Index j) const;

  /// Undirected edge count.
  std::size_t edge_count() const noexcept { return edge_count_; }
  /// Edges (i, j) with i < j, lexicographic.
  std::vector<Edge> edges() const;

  std::optional<Index> index_of(const std::string& id) const;
  bool has_boundaries() const;

  /// 0/1 adjacency as a compressed sparse matrix.
  Eigen::SparseMatrix<double, Eigen::RowMajor> adjacency() const;
  Matrix dense_adjacency() const;

  /// Graph induced by `nodes` (any order; duplicates rejected). The local
  /// index k corresponds to `nodes[k]`.
  RegionGraph induced(const NodeSet& nodes) const;

 private:
  std::vector<Region> regions_;
  std::vector<std::vector<Index>> adjacency_;
  std::unordered_map<std::string, Index> index_;
  std::size_t edge_count_ = 0;
};

/// Train / buffer / test partition for one evaluation fold.
struct FoldPlan {
  int fold_id = 0;
  int hops = 0;
  NodeSet test_nodes;
  NodeSet buffer_nodes;
  NodeSet train_nodes;
};

/// Fold plan together with the subgraph induced over test ∪ buffer.
struct BufferedSubgraph {
  FoldPlan plan;
  RegionGraph subgraph;
  /// local index -> index in the parent graph
  std::vector<Index> to_parent;
  bool connected = true;
};

/// Queen contiguity: regions are adjacent when their boundaries share at least
/// one point (a common vertex, or a vertex lying on the other's segment).
/// `tolerance` is the absolute coordinate tolerance for the touch test.
RegionGraph build_contiguity_graph(std::vector<Region> regions, double tolerance = 1e-9);

/// Directed k-nearest-neighbour relation on centroids, symmetrised by union.
RegionGraph knn_graph(std::vector<Region> regions, int k);

/// Edge (i, j) iff 1 <= shortest-path distance <= k.
RegionGraph khop_expand(const RegionGraph& graph, int k);

/// BFS hop distances from a set of sources; unreachable nodes get -1.
/// Exploration stops at `max_hops` when it is non-negative.
std::vector<int> bfs_distances(const RegionGraph& graph, std::span<const Index> sources, int max_hops = -1);

/// Buffer = nodes outside the test set within `hops` of it; train = the rest.
BufferedSubgraph subgraph_with_buffer(const RegionGraph& graph, const NodeSet& test_nodes, int hops,
                                      int fold_id = 0);

/// Components ordered by their smallest member; members sorted.
std::vector<NodeSet> connected_components(const RegionGraph& graph);

/// Checks the FoldPlan invariants against `graph`; throws InvalidArgument
/// naming the first violated one.
void validate_fold_plan(const RegionGraph& graph, const FoldPlan& plan);

}  // namespace geohealth
