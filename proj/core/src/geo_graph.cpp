#include "geohealth/geo_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace geohealth {

Point ring_centroid(const Ring& ring) {
  double area2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point& p = ring[i];
    const Point& q = ring[i + 1];
    const double cross = p.x * q.y - q.x * p.y;
    area2 += cross;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  if (std::abs(area2) > 1e-300) return {cx / (3.0 * area2), cy / (3.0 * area2)};
  Point mean;
  const std::size_t n = ring.size() > 1 ? ring.size() - 1 : ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    mean.x += ring[i].x;
    mean.y += ring[i].y;
  }
  if (n > 0) {
    mean.x /= static_cast<double>(n);
    mean.y /= static_cast<double>(n);
  }
  return mean;
}

void validate_ring(const Ring& ring, const std::string& region_id) {
  if (ring.size() < 2 || !(ring.front() == ring.back()))
    throw Error(ErrorCode::DegenerateGeometry, "region '" + region_id + "': ring is not closed");
  std::vector<Point> distinct(ring.begin(), ring.end() - 1);
  std::sort(distinct.begin(), distinct.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw Error(ErrorCode::DegenerateGeometry,
                "region '" + region_id + "': ring has " + std::to_string(distinct.size()) + " distinct vertices");
  for (const Point& p : ring)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorCode::DegenerateGeometry, "region '" + region_id + "': non-finite vertex");
}

// ---------------------------------------------------------------------------
// RegionGraph

RegionGraph::RegionGraph(std::vector<Region> regions, const std::vector<Edge>& edges)
    : regions_(std::move(regions)), adjacency_(regions_.size()) {
  const auto n = static_cast<Index>(regions_.size());
  index_.reserve(regions_.size());
  for (Index i = 0; i < n; ++i) {
    const Region& r = regions_[static_cast<std::size_t>(i)];
    if (!std::isfinite(r.centroid.x) || !std::isfinite(r.centroid.y))
      throw Error(ErrorCode::DegenerateGeometry, "region '" + r.id + "' has a non-finite centroid");
    if (!index_.emplace(r.id, i).second) throw Error(ErrorCode::DuplicateRegionId, "region id '" + r.id + "'");
  }
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw Error(ErrorCode::InvalidArgument,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range for " + std::to_string(n) +
                      " nodes");
    if (a == b) throw Error(ErrorCode::InvalidArgument, "self loop on node " + std::to_string(a));
    adjacency_[static_cast<std::size_t>(a)].push_back(b);
    adjacency_[static_cast<std::size_t>(b)].push_back(a);
  }
  std::size_t directed = 0;
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    directed += list.size();
  }
  edge_count_ = directed / 2;
}

bool RegionGraph::has_edge(Index i, Index j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<RegionGraph::Edge> RegionGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < adjacency_.size(); ++i)
    for (Index j : adjacency_[i])
      if (j > static_cast<Index>(i)) out.emplace_back(static_cast<Index>(i), j);
  return out;
}

std::optional<Index> RegionGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool RegionGraph::has_boundaries() const {
  if (regions_.empty()) return false;
  return std::all_of(regions_.begin(), regions_.end(), [](const Region& r) { return r.boundary.has_value(); });
}

Eigen::SparseMatrix<double, Eigen::RowMajor> RegionGraph::adjacency() const {
  const auto n = static_cast<Index>(size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edge_count_);
  for (Index i = 0; i < n; ++i)
    for (Index j : neighbors(i)) triplets.emplace_back(i, j, 1.0);
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Matrix RegionGraph::dense_adjacency() const {
  const auto n = static_cast<Index>(size());
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j : neighbors(i)) a(i, j) = 1.0;
  return a;
}

RegionGraph RegionGraph::induced(const NodeSet& nodes) const {
  std::vector<Index> local(size(), -1);
  std::vector<Region> sub_regions;
  sub_regions.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Index v = nodes[k];
    if (v < 0 || v >= static_cast<Index>(size()))
      throw Error(ErrorCode::InvalidArgument, "induced: node " + std::to_string(v) + " out of range");
    if (local[static_cast<std::size_t>(v)] >= 0)
      throw Error(ErrorCode::InvalidArgument, "induced: duplicate node " + std::to_string(v));
    local[static_cast<std::size_t>(v)] = static_cast<Index>(k);
    sub_regions.push_back(regions_[static_cast<std::size_t>(v)]);
  }
  std::vector<Edge> sub_edges;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    for (Index j : neighbors(nodes[k])) {
      const Index lj = local[static_cast<std::size_t>(j)];
      if (lj > static_cast<Index>(k)) sub_edges.emplace_back(static_cast<Index>(k), lj);
    }
  return RegionGraph(std::move(sub_regions), sub_edges);
}

// ---------------------------------------------------------------------------
// construction

namespace {

struct Box {
  double min_x, min_y, max_x, max_y;
};

Box bounding_box(const std::vector<Ring>& rings) {
  Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Ring& ring : rings)
    for (const Point& p : ring) {
      b.min_x = std::min(b.min_x, p.x);
      b.min_y = std::min(b.min_y, p.y);
      b.max_x = std::max(b.max_x, p.x);
      b.max_y = std::max(b.max_y, p.y);
    }
  return b;
}

bool point_on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x;
  const double ey = a.y + t * dy - p.y;
  return ex * ex + ey * ey <= tol * tol;
}

bool vertices_touch(const std::vector<Ring>& from, const std::vector<Ring>& onto, const Box& onto_box, double tol) {
  for (const Ring& ring : from)
    for (const Point& p : ring) {
      if (p.x < onto_box.min_x - tol || p.x > onto_box.max_x + tol || p.y < onto_box.min_y - tol ||
          p.y > onto_box.max_y + tol)
        continue;
      for (const Ring& other : onto)
        for (std::size_t s = 0; s + 1 < other.size(); ++s)
          if (point_on_segment(p, other[s], other[s + 1], tol)) return true;
    }
  return false;
}

}  // namespace

RegionGraph build_contiguity_graph(std::vector<Region> regions, double tolerance) {
  const std::size_t n = regions.size();
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Region& r = regions[i];
    if (!r.boundary || r.boundary->empty())
      throw Error(ErrorCode::MissingBoundary, "region '" + r.id + "' has no polygon");
    for (const Ring& ring : *r.boundary) validate_ring(ring, r.id);
    boxes[i] = bounding_box(*r.boundary);
  }

  // sweep over boxes sorted by min_x; candidate pairs need overlapping boxes
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].min_x < boxes[b].min_x || (boxes[a].min_x == boxes[b].min_x && a < b);
  });

  std::vector<RegionGraph::Edge> edges;
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    for (std::size_t oj = oi + 1; oj < n; ++oj) {
      const std::size_t j = order[oj];
      if (boxes[j].min_x > boxes[i].max_x + tolerance) break;
      if (boxes[j].min_y > boxes[i].max_y + tolerance || boxes[i].min_y > boxes[j].max_y + tolerance) continue;
      const auto& bi = *regions[i].boundary;
      const auto& bj = *regions[j].boundary;
      if (vertices_touch(bi, bj, boxes[j], tolerance) || vertices_touch(bj, bi, boxes[i], tolerance))
        edges.emplace_back(static_cast<Index>(std::min(i, j)), static_cast<Index>(std::max(i, j)));
    }
  }
  return RegionGraph(std::move(regions), edges);
}

RegionGraph knn_graph(std::vector<Region> regions, int k) {
  const std::size_t n = regions.size();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (static_cast<std::size_t>(k) >= n)
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " needs more than " + std::to_string(n) + " regions");

  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Point& p = regions[a].centroid;
      const Point& q = regions[b].centroid;
      return p.x < q.x || (p.x == q.x && p.y < q.y);
    });
    for (std::size_t t = 1; t < n; ++t)
      if (regions[order[t]].centroid == regions[order[t - 1]].centroid)
        throw Error(ErrorCode::DuplicateCentroid,
                    "regions '" + regions[order[t - 1]].id + "' and '" + regions[order[t]].id + "' share a centroid");
  }

  std::vector<RegionGraph::Edge> edges;
  edges.reserve(n * static_cast<std::size_t>(k));
  std::vector<std::pair<double, Index>> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = regions[i].centroid;
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = regions[j].centroid.x - p.x;
      const double dy = regions[j].centroid.y - p.y;
      cand[m++] = {dx * dx + dy * dy, static_cast<Index>(j)};
    }
    // pair ordering breaks distance ties by ascending index
    std::partial_sort(cand.begin(), cand.begin() + k, cand.begin() + static_cast<std::ptrdiff_t>(m));
    for (int t = 0; t < k; ++t) edges.emplace_back(static_cast<Index>(i), cand[static_cast<std::size_t>(t)].second);
  }
  return RegionGraph(std::move(regions), edges);
}

std::vector<int> bfs_distances(const RegionGraph& graph, std::span<const Index> sources, int max_hops) {
  std::vector<int> dist(graph.size(), -1);
  std::deque<Index> queue;
  for (Index s : sources) {
    if (dist[static_cast<std::size_t>(s)] != 0) {
      dist[static_cast<std::size_t>(s)] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(v)];
    if (max_hops >= 0 && d >= max_hops) continue;
    for (Index w : graph.neighbors(v)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = d + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

RegionGraph khop_expand(const RegionGraph& graph, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "khop_expand needs k >= 1");
  if (k == 1) return graph;
  const auto n = static_cast<Index>(graph.size());
  std::vector<RegionGraph::Edge> edges;
  std::vector<int> dist(graph.size(), -1);
  std::vector<Index> touched;
  std::deque<Index> queue;
  for (Index s = 0; s < n; ++s) {
    dist[static_cast<std::size_t>(s)] = 0;
    touched.assign(1, s);
    queue.assign(1, s);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      const int d = dist[static_cast<std::size_t>(v)];
      if (d >= k) continue;
      for (Index w : graph.neighbors(v)) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = d + 1;
          touched.push_back(w);
          queue.push_back(w);
          if (w > s) edges.emplace_back(s, w);
        }
      }
    }
    for (Index t : touched) dist[static_cast<std::size_t>(t)] = -1;
  }
  return RegionGraph(graph.regions(), edges);
}

BufferedSubgraph subgraph_with_buffer(const RegionGraph& graph, const NodeSet& test_nodes, int hops, int fold_id) {
  if (test_nodes.empty()) throw Error(ErrorCode::EmptyTestSet, "fold " + std::to_string(fold_id) + " has no test nodes");
  if (hops < 0) throw Error(ErrorCode::InvalidArgument, "buffer hops must be >= 0");
  const auto n = static_cast<Index>(graph.size());
  for (Index v : test_nodes)
    if (v < 0 || v >= n) throw Error(ErrorCode::InvalidArgument, "test node " + std::to_string(v) + " out of range");

  BufferedSubgraph out;
  out.plan.fold_id = fold_id;
  out.plan.hops = hops;
  out.plan.test_nodes = test_nodes;
  std::sort(out.plan.test_nodes.begin(), out.plan.test_nodes.end());
  out.plan.test_nodes.erase(std::unique(out.plan.test_nodes.begin(), out.plan.test_nodes.end()),
                            out.plan.test_nodes.end());

  const std::vector<int> dist = bfs_distances(graph, out.plan.test_nodes, hops);
  for (Index v = 0; v < n; ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d == 0) continue;
    if (d > 0) out.plan.buffer_nodes.push_back(v);
    else out.plan.train_nodes.push_back(v);
  }

  out.to_parent = out.plan.test_nodes;
  out.to_parent.insert(out.to_parent.end(), out.plan.buffer_nodes.begin(), out.plan.buffer_nodes.end());
  std::sort(out.to_parent.begin(), out.to_parent.end());
  out.subgraph = graph.induced(out.to_parent);
  out.connected = connected_components(out.subgraph).size() <= 1;
  return out;
}

std::vector<NodeSet> connected_components(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  std::vector<bool> seen(graph.size(), false);
  std::vector<NodeSet> out;
  for (Index s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    NodeSet comp;
    std::deque<Index> queue{s};
    seen[static_cast<std::size_t>(s)] = true;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (Index w : graph.neighbors(v))
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          queue.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

void validate_fold_plan(const RegionGraph& graph, const FoldPlan& plan) {
  const std::size_t n = graph.size();
  std::vector<int> role(n, -1);
  auto assign = [&](const NodeSet& set, int r, const char* name) {
    for (Index v : set) {
      if (v < 0 || static_cast<std::size_t>(v) >= n)
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " node out of range");
      if (role[static_cast<std::size_t>(v)] != -1)
        throw Error(ErrorCode::InvalidArgument,
                    "fold " + std::to_string(plan.fold_id) + ": node " + std::to_string(v) + " in two sets");
      role[static_cast<std::size_t>(v)] = r;
    }
  };
  assign(plan.test_nodes, 0, "test");
  assign(plan.buffer_nodes, 1, "buffer");
  assign(plan.train_nodes, 2, "train");
  for (std::size_t v = 0; v < n; ++v)
    if (role[v] == -1)
      throw Error(ErrorCode::InvalidArgument,
                  "fold " + std::to_string(plan.fold_id) + ": node " + std::to_string(v) + " unassigned");

  const std::vector<int> dist = bfs_distances(graph, plan.test_nodes, plan.hops);
  for (std::size_t v = 0; v < n; ++v) {
    if (role[v] == 2 && dist[v] >= 0)
      throw Error(ErrorCode::InvalidArgument, "fold " + std::to_string(plan.fold_id) + ": train node " +
                                                  std::to_string(v) + " within " + std::to_string(plan.hops) +
                                                  " hops of the test set");
    if (role[v] == 1 && dist[v] < 0)
      throw Error(ErrorCode::InvalidArgument,
                  "fold " + std::to_string(plan.fold_id) + ": buffer node " + std::to_string(v) + " beyond radius");
  }
}

}  // namespace geohealth
