#include "geohealth/spatial_cv/folds.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "geohealth/rng.hpp"

namespace geohealth::cv {

namespace {

struct Grower {
  std::vector<Index> members;
  std::deque<Index> frontier;
  std::size_t target = 0;
  int restarts = 0;
  bool full() const { return members.size() >= target; }
};

}  // namespace

std::vector<FoldPlan> spatial_kfold_split(const RegionGraph& graph, int folds, std::uint64_t seed, int hops,
                                          Diagnostics* diag) {
  const std::size_t n = graph.size();
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < static_cast<std::size_t>(folds))
    throw Error(ErrorCode::GraphTooSmall,
                "graph has " + std::to_string(n) + " nodes, fewer than " + std::to_string(folds) + " folds");
  if (hops < 0) throw Error(ErrorCode::InvalidArgument, "hops must be non-negative");

  const auto k = static_cast<std::size_t>(folds);
  Rng rng(seed);
  std::vector<int> owner(n, -1);
  std::vector<Grower> grow(k);
  for (std::size_t f = 0; f < k; ++f) grow[f].target = n / k + (f < n % k ? 1 : 0);

  // Tie order for seed picking and restarts.
  std::vector<Index> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<Index>(i);
  rng.shuffle(order);

  auto claim = [&](std::size_t f, Index v) {
    owner[static_cast<std::size_t>(v)] = static_cast<int>(f);
    grow[f].members.push_back(v);
    std::vector<Index> next(graph.neighbors(v).begin(), graph.neighbors(v).end());
    rng.shuffle(next);
    for (Index u : next)
      if (owner[static_cast<std::size_t>(u)] < 0) grow[f].frontier.push_back(u);
  };

  // Farthest-point seeds; unreachable counts as infinitely far.
  std::vector<Index> seeds{order.front()};
  std::vector<long> dist(n, std::numeric_limits<long>::max());
  auto relax = [&](Index s) {
    const std::vector<int> d = bfs_distances(graph, std::span<const Index>(&s, 1));
    for (std::size_t i = 0; i < n; ++i) {
      const long di = d[i] < 0 ? std::numeric_limits<long>::max() : d[i];
      dist[i] = std::min(dist[i], di);
    }
  };
  relax(seeds.front());
  while (seeds.size() < k) {
    Index best = -1;
    for (Index v : order) {
      const auto vi = static_cast<std::size_t>(v);
      if (dist[vi] == 0) continue;
      if (best < 0 || dist[vi] > dist[static_cast<std::size_t>(best)]) best = v;
    }
    seeds.push_back(best);
    relax(best);
  }
  for (std::size_t f = 0; f < k; ++f) claim(f, seeds[f]);

  std::size_t assigned = k;
  std::size_t cursor = 0;
  while (assigned < n) {
    bool progressed = false;
    for (std::size_t f = 0; f < k && assigned < n; ++f) {
      Grower& g = grow[f];
      if (g.full()) continue;
      while (!g.frontier.empty() && owner[static_cast<std::size_t>(g.frontier.front())] >= 0) g.frontier.pop_front();
      if (g.frontier.empty()) continue;
      const Index v = g.frontier.front();
      g.frontier.pop_front();
      claim(f, v);
      ++assigned;
      progressed = true;
    }
    if (progressed) continue;
    // Every open fold is walled in: restart the smallest one at a free node.
    std::size_t pick = k;
    for (std::size_t f = 0; f < k; ++f)
      if (!grow[f].full() && (pick == k || grow[f].members.size() < grow[pick].members.size())) pick = f;
    while (owner[static_cast<std::size_t>(order[cursor])] >= 0) ++cursor;
    claim(pick, order[cursor]);
    ++grow[pick].restarts;
    ++assigned;
  }

  std::vector<FoldPlan> plans;
  plans.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    NodeSet test = grow[f].members;
    std::sort(test.begin(), test.end());
    BufferedSubgraph b = subgraph_with_buffer(graph, test, hops, static_cast<int>(f));
    const RegionGraph test_graph = graph.induced(test);
    if (connected_components(test_graph).size() > 1)
      warn(diag, "fold " + std::to_string(f) + " test set is not connected");
    plans.push_back(std::move(b.plan));
  }
  return plans;
}

std::vector<FoldPlan> tenfold_split(const RegionGraph& graph, std::uint64_t seed, int hops, Diagnostics* diag) {
  return spatial_kfold_split(graph, 10, seed, hops, diag);
}

std::vector<std::optional<std::string>> group_labels(const RegionGraph& graph) {
  std::vector<std::optional<std::string>> out;
  out.reserve(graph.size());
  for (const Region& r : graph.regions()) out.push_back(r.group);
  return out;
}

std::vector<std::string> distinct_groups(const std::vector<std::optional<std::string>>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels)
    if (l && std::find(out.begin(), out.end(), *l) == out.end()) out.push_back(*l);
  return out;
}

FoldPlan loocv_region_split(const RegionGraph& graph, const std::vector<std::optional<std::string>>& labels,
                            const std::string& target_group, int hops, int fold_id) {
  if (target_group.empty()) throw Error(ErrorCode::InvalidArgument, "target group is empty");
  if (labels.size() != graph.size())
    throw Error(ErrorCode::ShapeMismatch, "group labels do not match the graph size");
  NodeSet test;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] && *labels[i] == target_group) test.push_back(static_cast<Index>(i));
  if (test.empty()) throw Error(ErrorCode::UnknownGroup, "no region belongs to group '" + target_group + "'");
  return subgraph_with_buffer(graph, test, hops, fold_id).plan;
}

FoldPlan loocv_region_split(const RegionGraph& graph, const std::string& target_group, int hops, int fold_id) {
  return loocv_region_split(graph, group_labels(graph), target_group, hops, fold_id);
}

}  // namespace geohealth::cv
