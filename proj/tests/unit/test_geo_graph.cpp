#include <algorithm>
#include <set>

#include "doctest.h"
#include "geohealth/geo_graph.hpp"
#include "geohealth/geo_io.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace geohealth;

namespace {

std::vector<Region> unit_grid(int rows, int cols) {
  std::vector<Region> out;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.push_back(oracle::square_region("r" + std::to_string(r) + "c" + std::to_string(c), c, r));
  return out;
}

/// Every pair of squares sharing a vertex, by brute force over corner lists.
std::set<std::pair<Index, Index>> shared_vertex_pairs(const std::vector<Region>& regions) {
  std::set<std::pair<Index, Index>> out;
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      bool touch = false;
      for (const Point& p : regions[i].boundary->front())
        for (const Point& q : regions[j].boundary->front()) touch = touch || (p == q);
      if (touch) out.emplace(static_cast<Index>(i), static_cast<Index>(j));
    }
  return out;
}

void require_symmetric(const RegionGraph& g) {
  const Matrix a = g.dense_adjacency();
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);
  for (Index i = 0; i < static_cast<Index>(g.size()); ++i)
    for (Index j : g.neighbors(i)) CHECK(g.has_edge(j, i));
}

std::set<std::pair<Index, Index>> edge_set(const RegionGraph& g) {
  auto e = g.edges();
  return {e.begin(), e.end()};
}

}  // namespace

TEST_CASE("contiguity: 2x2 grid has 4 rook and 2 corner pairs") {
  auto regions = unit_grid(2, 2);
  const auto expected = shared_vertex_pairs(regions);
  const RegionGraph g = build_contiguity_graph(regions);
  CHECK(g.edge_count() == 6);
  CHECK(edge_set(g) == expected);
  require_symmetric(g);
}

TEST_CASE("contiguity: single region and disjoint squares") {
  CHECK(build_contiguity_graph({oracle::square_region("a", 0, 0)}).edge_count() == 0);
  const RegionGraph g =
      build_contiguity_graph({oracle::square_region("a", 0, 0), oracle::square_region("b", 50, 50)});
  CHECK(g.size() == 2);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("contiguity: grid matches analytic queen adjacency") {
  for (auto [r, c] : {std::pair{5, 5}, std::pair{3, 7}, std::pair{1, 4}}) {
    const RegionGraph g = build_contiguity_graph(unit_grid(r, c));
    CHECK(g.dense_adjacency() == oracle::grid_queen_adjacency(r, c));
  }
  CHECK(build_contiguity_graph(unit_grid(5, 5)).edge_count() == 72);
}

TEST_CASE("contiguity: vertex lying on a neighbour's segment counts") {
  // big square [0,2]^2 and a unit square whose corner sits mid-edge at (2,1)
  Region big = oracle::square_region("big", 0, 0, 2.0);
  Region small = oracle::square_region("small", 2, 1, 1.0);
  const RegionGraph g = build_contiguity_graph({big, small});
  CHECK(g.edge_count() == 1);
}

TEST_CASE("contiguity errors") {
  Region bare = oracle::point_region("p", 0, 0);
  CHECK_THROWS_AS(build_contiguity_graph({oracle::square_region("a", 0, 0), bare}), Error);
  try {
    build_contiguity_graph({bare});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingBoundary);
  }

  Region flat = oracle::square_region("flat", 0, 0);
  flat.boundary = std::vector<Ring>{{{0, 0}, {1, 0}, {0, 0}}};
  try {
    build_contiguity_graph({flat});
    FAIL("expected DegenerateGeometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }

  Region open = oracle::square_region("open", 0, 0);
  open.boundary->front().pop_back();
  CHECK_THROWS_AS(validate_ring(open.boundary->front(), "open"), Error);
}

TEST_CASE("knn: three collinear points, k=1") {
  std::vector<Region> pts{oracle::point_region("a", 0, 0), oracle::point_region("b", 1, 0),
                          oracle::point_region("c", 10, 0)};
  const RegionGraph g = knn_graph(pts, 1);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 2}});
}

TEST_CASE("knn: unit square corners, k=2 gives the 4-cycle") {
  std::vector<Region> pts{oracle::point_region("a", 0, 0), oracle::point_region("b", 1, 0),
                          oracle::point_region("c", 1, 1), oracle::point_region("d", 0, 1)};
  const RegionGraph g = knn_graph(pts, 2);
  CHECK(edge_set(g) == std::set<std::pair<Index, Index>>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
}

TEST_CASE("knn: k = N-1 is complete; errors") {
  auto pts = oracle::line_regions(6);
  CHECK(knn_graph(pts, 5).edge_count() == 15);
  try {
    knn_graph(pts, 6);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KTooLarge);
  }
  pts[3].centroid = pts[2].centroid;
  try {
    knn_graph(pts, 2);
    FAIL("expected DuplicateCentroid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateCentroid);
  }
}

TEST_CASE("knn: equidistant neighbours resolved by smaller index") {
  // node 0 at the origin, nodes 1..4 on the unit circle; k=1 from node 0 picks node 1
  std::vector<Region> pts{oracle::point_region("o", 0, 0), oracle::point_region("e", 1, 0),
                          oracle::point_region("n", 0, 1), oracle::point_region("w", -1, 0),
                          oracle::point_region("s", 0, -1)};
  const RegionGraph g = knn_graph(pts, 1);
  CHECK(g.has_edge(0, 1));
  CHECK(g.degree(0) == 4);  // every rim node picks the centre
}

TEST_CASE("knn property: symmetric with degree >= k") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<Region> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(oracle::point_region("p" + std::to_string(i), rng.uniform(), rng.uniform()));
    for (int k : {1, 3, 8}) {
      const RegionGraph g = knn_graph(pts, k);
      require_symmetric(g);
      for (Index i = 0; i < 30; ++i) CHECK(g.degree(i) >= static_cast<std::size_t>(k));
    }
  }
}

TEST_CASE("khop: identity, path, diameter") {
  const RegionGraph p = oracle::path_graph(4);
  CHECK(edge_set(khop_expand(p, 1)) == edge_set(p));
  CHECK(edge_set(khop_expand(p, 2)) == std::set<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {0, 2}, {1, 3}});
  CHECK(khop_expand(p, 3).edge_count() == 6);
  CHECK(khop_expand(oracle::cycle_graph(9), 4).edge_count() == 36);
  CHECK_THROWS_AS(khop_expand(p, 0), Error);
}

TEST_CASE("khop property: matches Floyd-Warshall and is monotone in k") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const RegionGraph g = oracle::random_graph(18, 0.08, seed, seed % 2 == 0);
    const auto d = oracle::floyd_warshall(g);
    std::set<std::pair<Index, Index>> previous;
    for (int k = 1; k <= 5; ++k) {
      const RegionGraph h = khop_expand(g, k);
      require_symmetric(h);
      std::set<std::pair<Index, Index>> expected;
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
          if (d[i][j] >= 1 && d[i][j] <= k) expected.emplace(i, j);
      const auto got = edge_set(h);
      CHECK(got == expected);
      CHECK(std::includes(got.begin(), got.end(), previous.begin(), previous.end()));
      previous = got;
    }
  }
}

TEST_CASE("bfs distances agree with Floyd-Warshall") {
  const RegionGraph g = oracle::random_graph(15, 0.1, 42, false);
  const auto d = oracle::floyd_warshall(g);
  for (Index s = 0; s < 15; ++s) {
    const Index src[] = {s};
    const auto got = bfs_distances(g, src);
    for (Index t = 0; t < 15; ++t) CHECK(got[static_cast<std::size_t>(t)] == d[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)]);
  }
}

TEST_CASE("buffer: hops=0, path example, whole graph") {
  const RegionGraph p = oracle::path_graph(5);
  auto b0 = subgraph_with_buffer(p, {2}, 0);
  CHECK(b0.plan.buffer_nodes.empty());
  CHECK(b0.subgraph.size() == 1);
  CHECK(b0.plan.train_nodes == NodeSet{0, 1, 3, 4});

  auto b2 = subgraph_with_buffer(p, {2}, 2);
  CHECK(b2.plan.buffer_nodes == NodeSet{0, 1, 3, 4});
  CHECK(b2.plan.train_nodes.empty());
  CHECK(b2.subgraph.size() == 5);

  auto all = subgraph_with_buffer(p, {0, 1, 2, 3, 4}, 2);
  CHECK(all.plan.buffer_nodes.empty());
  CHECK(all.plan.train_nodes.empty());
  CHECK(all.subgraph.edge_count() == p.edge_count());

  try {
    subgraph_with_buffer(p, {}, 1);
    FAIL("expected EmptyTestSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTestSet);
  }
}

TEST_CASE("buffer: remap table and induced edges") {
  const RegionGraph g = oracle::random_graph(20, 0.1, 7);
  const auto b = subgraph_with_buffer(g, {3, 11}, 1);
  CHECK(std::is_sorted(b.to_parent.begin(), b.to_parent.end()));
  for (Index a = 0; a < static_cast<Index>(b.subgraph.size()); ++a)
    for (Index c = 0; c < static_cast<Index>(b.subgraph.size()); ++c)
      CHECK(b.subgraph.has_edge(a, c) == g.has_edge(b.to_parent[static_cast<std::size_t>(a)], b.to_parent[static_cast<std::size_t>(c)]));
}

TEST_CASE("buffer property: partition and radius on random graphs") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const RegionGraph g = oracle::random_graph(25, 0.06, seed, seed % 3 != 0);
    const auto d = oracle::floyd_warshall(g);
    Rng rng(seed * 31);
    NodeSet test;
    for (Index i = 0; i < 25; ++i)
      if (rng.uniform() < 0.2) test.push_back(i);
    if (test.empty()) test.push_back(0);
    for (int hops : {0, 1, 2, 3}) {
      const auto b = subgraph_with_buffer(g, test, hops);
      validate_fold_plan(g, b.plan);
      std::vector<int> seen(25, 0);
      for (auto* s : {&b.plan.test_nodes, &b.plan.buffer_nodes, &b.plan.train_nodes})
        for (Index v : *s) ++seen[static_cast<std::size_t>(v)];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      for (Index t : b.plan.test_nodes)
        for (Index r : b.plan.train_nodes) {
          const int dist = d[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)];
          CHECK((dist == -1 || dist > hops));
        }
      for (Index v : b.plan.buffer_nodes) {
        int best = -1;
        for (Index t : test) {
          const int dist = d[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)];
          if (dist >= 0 && (best < 0 || dist < best)) best = dist;
        }
        CHECK(best >= 1);
        CHECK(best <= hops);
      }
    }
  }
}

TEST_CASE("validate_fold_plan rejects a train node inside the buffer radius") {
  const RegionGraph p = oracle::path_graph(5);
  FoldPlan plan;
  plan.hops = 1;
  plan.test_nodes = {2};
  plan.buffer_nodes = {1};
  plan.train_nodes = {0, 3, 4};
  CHECK_THROWS_AS(validate_fold_plan(p, plan), Error);
  plan.buffer_nodes = {1, 3};
  plan.train_nodes = {0, 4, 4};
  CHECK_THROWS_AS(validate_fold_plan(p, plan), Error);
}

TEST_CASE("components: singletons, path, two triangles") {
  CHECK(connected_components(oracle::from_edges(3, {})).size() == 3);
  CHECK(connected_components(oracle::path_graph(6)).size() == 1);
  const auto two = connected_components(oracle::from_edges(6, {{0, 2}, {2, 4}, {4, 0}, {1, 3}, {3, 5}, {5, 1}}));
  REQUIRE(two.size() == 2);
  CHECK(two[0] == NodeSet{0, 2, 4});
  CHECK(two[1] == NodeSet{1, 3, 5});
}

TEST_CASE("RegionGraph construction rules") {
  CHECK_THROWS_AS(oracle::from_edges(3, {{1, 1}}), Error);
  CHECK_THROWS_AS(oracle::from_edges(3, {{0, 3}}), Error);
  const RegionGraph g = oracle::from_edges(3, {{0, 1}, {1, 0}, {0, 1}});
  CHECK(g.edge_count() == 1);
  std::vector<Region> dup{oracle::point_region("a", 0, 0), oracle::point_region("a", 1, 0)};
  try {
    RegionGraph(dup, {});
    FAIL("expected DuplicateRegionId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateRegionId);
  }
  CHECK(g.index_of("n2").value() == 2);
  CHECK_FALSE(g.index_of("zz").has_value());
}

TEST_CASE("io: GeoJSON polygons, points and edge lists") {
  const auto doc = nlohmann::json::parse(R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature", "properties": {"id": "A", "group": "west"},
       "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
      {"type": "Feature", "properties": {"id": "B"},
       "geometry": {"type": "MultiPolygon", "coordinates": [[[[1,0],[2,0],[2,1],[1,1],[1,0]]]]}},
      {"type": "Feature", "id": 7, "properties": {},
       "geometry": {"type": "Point", "coordinates": [5, 5]}}
    ]})");
  const auto regions = io::regions_from_geojson(doc);
  REQUIRE(regions.size() == 3);
  CHECK(regions[0].group.value() == "west");
  CHECK(regions[0].centroid.x == doctest::Approx(0.5));
  CHECK(regions[1].centroid.x == doctest::Approx(1.5));
  CHECK(regions[2].id == "7");
  CHECK_FALSE(regions[2].boundary.has_value());

  std::vector<Region> polys(regions.begin(), regions.begin() + 2);
  const RegionGraph g = build_contiguity_graph(polys);
  CHECK(g.edge_count() == 1);

  scratch::Dir dir("io");
  const auto edges = dir.write("g.csv", io::edge_list_csv(g));
  CHECK(scratch::slurp(edges) == "src,dst\nA,B\n");
  const RegionGraph back = io::load_graph(polys, edges);
  CHECK(back.edges() == g.edges());

  dir.write("bad.csv", "src,dst\nA,Z\n");
  CHECK_THROWS_AS(io::load_graph(polys, dir / "bad.csv"), Error);
  CHECK_THROWS_AS(io::load_regions(dir / "absent.geojson"), Error);
}

TEST_CASE("io: region CSV round trip") {
  std::vector<Region> r{oracle::point_region("x1", 0.25, 3, "g1"), oracle::point_region("x2", -1, 2.5)};
  scratch::Dir dir("csvio");
  const auto p = dir.write("r.csv", io::regions_to_csv(r));
  const auto back = io::load_regions(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].centroid == r[0].centroid);
  CHECK(back[0].group.value() == "g1");
  CHECK_FALSE(back[1].group.has_value());
}
