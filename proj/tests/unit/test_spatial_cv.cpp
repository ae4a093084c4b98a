#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "geohealth/spatial_cv/ablation.hpp"
#include "geohealth/spatial_cv/folds.hpp"
#include "geohealth/spatial_cv/metrics.hpp"
#include "geohealth/spatial_cv/run_cv.hpp"
#include "geohealth/spatial_cv/search.hpp"
#include "oracles.hpp"

using namespace geohealth;
using namespace geohealth::cv;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::InvalidArgument;
}

RegionGraph grid_graph(int rows, int cols) {
  const Matrix a = oracle::grid_queen_adjacency(rows, cols);
  std::vector<Region> regions;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const char* q = r < rows / 2 ? (c < cols / 2 ? "Q1" : "Q2") : (c < cols / 2 ? "Q3" : "Q4");
      regions.push_back(oracle::point_region("r" + std::to_string(r) + "c" + std::to_string(c), c, r, q));
    }
  std::vector<RegionGraph::Edge> e;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0) e.emplace_back(i, j);
  return RegionGraph(std::move(regions), e);
}

RegionGraph grouped_path(const std::vector<std::string>& groups) {
  std::vector<Region> regions;
  std::vector<RegionGraph::Edge> e;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    regions.push_back(oracle::point_region("n" + std::to_string(i), static_cast<double>(i), 0.0, groups[i]));
    if (i > 0) e.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(i));
  }
  return RegionGraph(std::move(regions), e);
}

// Checks a plan against shortest-path distances from the test set.
void check_plan(const RegionGraph& g, const FoldPlan& p, const std::vector<std::vector<int>>& dist) {
  const auto n = static_cast<Index>(g.size());
  std::set<Index> test(p.test_nodes.begin(), p.test_nodes.end());
  std::set<Index> buffer, train;
  for (Index v = 0; v < n; ++v) {
    if (test.count(v)) continue;
    int best = std::numeric_limits<int>::max();
    for (Index t : p.test_nodes)
      if (dist[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)] >= 0)
        best = std::min(best, dist[static_cast<std::size_t>(t)][static_cast<std::size_t>(v)]);
    (best <= p.hops ? buffer : train).insert(v);
  }
  CHECK(std::set<Index>(p.buffer_nodes.begin(), p.buffer_nodes.end()) == buffer);
  CHECK(std::set<Index>(p.train_nodes.begin(), p.train_nodes.end()) == train);
  CHECK(p.test_nodes.size() + p.buffer_nodes.size() + p.train_nodes.size() == g.size());
}

}  // namespace

TEST_CASE("tenfold on a 10-cycle: singleton tests, 4-node buffers") {
  const RegionGraph g = oracle::cycle_graph(10);
  const auto folds = tenfold_split(g, 3, 2);
  REQUIRE(folds.size() == 10);
  std::set<Index> seen;
  for (const auto& f : folds) {
    CHECK(f.test_nodes.size() == 1);
    CHECK(f.buffer_nodes.size() == 4);
    CHECK(f.train_nodes.size() == 5);
    CHECK(f.hops == 2);
    seen.insert(f.test_nodes[0]);
  }
  CHECK(seen.size() == 10);
  CHECK(code_of([] { tenfold_split(oracle::path_graph(9), 0); }) == ErrorCode::GraphTooSmall);
}

TEST_CASE("property: folds partition V, sizes within one, buffers are hop balls") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index n = 20 + static_cast<Index>(seed * 3);
    const RegionGraph g = oracle::random_graph(n, 0.05, seed + 50);
    const auto dist = oracle::floyd_warshall(g);
    const int hops = static_cast<int>(seed % 3);
    const auto folds = tenfold_split(g, seed, hops);
    REQUIRE(folds.size() == 10);
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    std::size_t lo = g.size(), hi = 0;
    for (const auto& f : folds) {
      INFO("seed ", seed, " fold ", f.fold_id);
      for (Index t : f.test_nodes) ++hits[static_cast<std::size_t>(t)];
      lo = std::min(lo, f.test_nodes.size());
      hi = std::max(hi, f.test_nodes.size());
      check_plan(g, f, dist);
      CHECK_NOTHROW(validate_fold_plan(g, f));
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("tenfold: seeded, and different seeds move the split") {
  const RegionGraph g = grid_graph(8, 8);
  const auto a = tenfold_split(g, 1), b = tenfold_split(g, 1), c = tenfold_split(g, 2);
  bool same = true, differ = false;
  for (std::size_t f = 0; f < a.size(); ++f) {
    same = same && a[f].test_nodes == b[f].test_nodes;
    differ = differ || a[f].test_nodes != c[f].test_nodes;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("loocv region split") {
  const RegionGraph g = grouped_path({"A", "A", "A", "B", "B", "B"});
  const FoldPlan zero = loocv_region_split(g, "A", 0);
  CHECK(zero.test_nodes == NodeSet{0, 1, 2});
  CHECK(zero.buffer_nodes.empty());
  CHECK(zero.train_nodes == NodeSet{3, 4, 5});

  const FoldPlan two = loocv_region_split(g, "B", 2, 1);
  CHECK(two.test_nodes == NodeSet{3, 4, 5});
  CHECK(two.buffer_nodes == NodeSet{1, 2});
  CHECK(two.train_nodes == NodeSet{0});
  CHECK(two.fold_id == 1);

  CHECK(code_of([&] { loocv_region_split(g, "C", 1); }) == ErrorCode::UnknownGroup);
  CHECK(distinct_groups(group_labels(g)) == std::vector<std::string>{"A", "B"});
}

TEST_CASE("metrics: worked example and constant targets") {
  Vector y(2), yhat(2);
  y << 0, 2;
  yhat << 1, 1;
  const Metrics m = compute_metrics(yhat, y);
  CHECK(m.rmse == doctest::Approx(1.0));
  CHECK(m.mae == doctest::Approx(1.0));
  CHECK(m.r2 == doctest::Approx(0.0));

  Diagnostics d;
  const Metrics c = compute_metrics(Vector::Zero(3), Vector::Ones(3), {}, &d);
  CHECK(std::isnan(c.r2));
  CHECK(c.rmse == doctest::Approx(1.0));
  CHECK(d.warnings.size() == 1);

  CHECK(code_of([&] { compute_metrics(yhat, y, Mask{false, false}); }) == ErrorCode::EmptyMask);
  const Metrics masked = compute_metrics(yhat, y, Mask{true, false});
  CHECK(masked.mae == doctest::Approx(1.0));
}

TEST_CASE("property: rmse >= mae, r2 <= 1") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vector y = oracle::random_matrix(15, 1, seed).col(0);
    const Vector p = oracle::random_matrix(15, 1, seed + 100).col(0);
    const Metrics m = compute_metrics(p, y);
    CHECK(m.rmse >= m.mae - 1e-15);
    CHECK(m.r2 <= 1.0);
    CHECK(compute_metrics(y, y).r2 == 1.0);
  }
}

TEST_CASE("mean and population std, formatted") {
  const MeanStd s = mean_std({0.905, 0.925});
  CHECK(s.mean == doctest::Approx(0.915));
  CHECK(s.std == doctest::Approx(0.010));
  CHECK(format_mean_std(s) == "0.915 \xC2\xB1 0.010");
  CHECK(std::isnan(mean_std({}).mean));
}

TEST_CASE("random search: selection rules") {
  SearchSpace space;
  const auto one = random_search(space, 1, 5, [](const TrialConfig&, int) { return -3.0; });
  CHECK(one.best_index == 0);
  CHECK(one.trials.size() == 1);

  const auto ties = random_search(space, 6, 5, [](const TrialConfig&, int i) { return i >= 2 ? 1.0 : 0.0; });
  CHECK(ties.best_index == 2);
  CHECK(ties.best == ties.trials[2].config);

  const auto nan = random_search(space, 4, 5, [](const TrialConfig&, int i) {
    return i == 0 ? std::numeric_limits<double>::quiet_NaN() : -static_cast<double>(i);
  });
  CHECK(nan.best_index == 1);

  CHECK(sample_trials(space, 10, 9) == sample_trials(space, 10, 9));
  CHECK(sample_trials(space, 10, 9) != sample_trials(space, 10, 10));
  for (const auto& t : sample_trials(space, 50, 1)) {
    CHECK(std::count(space.lr.begin(), space.lr.end(), t.lr) == 1);
    CHECK(std::count(space.hidden1.begin(), space.hidden1.end(), t.hidden1) == 1);
    CHECK(std::count(space.patience.begin(), space.patience.end(), t.patience) == 1);
  }
  SearchSpace bad;
  bad.dropout.clear();
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);
  const SearchSpace back = search_space_from_json(search_space_to_json(space));
  CHECK(back.epochs == space.epochs);
  CHECK(back.optimizer == space.optimizer);
}

TEST_CASE("search space defaults") {
  SearchSpace s;
  CHECK(s.lr == std::vector<double>{0.001, 0.005, 0.01});
  CHECK(s.hidden1 == std::vector<int>{64, 128, 256});
  CHECK(s.hidden2 == std::vector<int>{16, 32, 64});
  CHECK(s.dropout == std::vector<double>{0.1, 0.3, 0.5});
  CHECK(s.optimizer.size() == 3);
}

TEST_CASE("split_train_val: disjoint cover of the eligible nodes") {
  Mask eligible(50, true);
  eligible[3] = eligible[7] = false;
  const auto [tr, va] = split_train_val(eligible, 0.2, 4);
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    CHECK_FALSE((tr[i] && va[i]));
    CHECK((tr[i] || va[i]) == eligible[i]);
  }
  CHECK(count(va) >= 9);
  CHECK(count(va) <= 10);
  CHECK(split_train_val(eligible, 0.2, 4) == split_train_val(eligible, 0.2, 4));
}

TEST_CASE("run_folds: OLS on a linear target, leakage instrumentation") {
  const RegionGraph g = grid_graph(10, 10);
  const Matrix x = oracle::random_matrix(100, 3, 21);
  Vector beta(3);
  beta << 1.5, -2.0, 0.5;
  const Vector y = (x * beta).array() + 0.3;

  for (BufferRole role : {BufferRole::train, BufferRole::excluded}) {
    CvOptions opt;
    opt.seed = 4;
    opt.buffer_role = role;
    const auto folds = make_folds(g, opt);
    const FoldPredictor ols = baseline_predictor(BaselineKind::ols);
    const FoldPredictor spy = [&](const FoldContext& ctx) {
      for (Index t : ctx.plan.test_nodes) {
        CHECK(std::isnan(ctx.y_train(t)));
        CHECK_FALSE(ctx.train_mask[static_cast<std::size_t>(t)]);
        CHECK_FALSE(ctx.val_mask[static_cast<std::size_t>(t)]);
      }
      if (role == BufferRole::excluded)
        for (Index b : ctx.plan.buffer_nodes) {
          CHECK_FALSE(ctx.train_mask[static_cast<std::size_t>(b)]);
          CHECK_FALSE(ctx.val_mask[static_cast<std::size_t>(b)]);
        }
      return ols(ctx);
    };
    const CvResult r = run_folds(g, x, y, folds, spy, opt);
    REQUIRE(r.folds.size() == 10);
    std::vector<double> r2;
    for (const auto& f : r.folds) {
      CHECK(f.metrics.r2 > 0.99);
      r2.push_back(f.metrics.r2);
      for (Index t : f.test_nodes) {
        CHECK(std::find(f.loss_nodes.begin(), f.loss_nodes.end(), t) == f.loss_nodes.end());
        CHECK(std::find(f.val_nodes.begin(), f.val_nodes.end(), t) == f.val_nodes.end());
      }
    }
    const MeanStd ms = mean_std(r2);
    CHECK(std::abs(r.r2.mean - ms.mean) < 1e-12);
    CHECK(std::abs(r.r2.std - ms.std) < 1e-12);
  }
}

TEST_CASE("run_folds: unlabelled nodes stay out of losses and metrics") {
  const RegionGraph g = grid_graph(6, 6);
  const Matrix x = oracle::random_matrix(36, 2, 5);
  Vector y = x.col(0) - x.col(1);
  y(0) = y(20) = std::numeric_limits<double>::quiet_NaN();
  CvOptions opt;
  opt.seed = 1;
  const CvResult r = run_folds(g, x, y, make_folds(g, opt), baseline_predictor(BaselineKind::ols), opt);
  for (const auto& f : r.folds) {
    for (Index v : f.loss_nodes) CHECK(std::isfinite(y(v)));
    for (Index v : f.val_nodes) CHECK(std::isfinite(y(v)));
    CHECK(std::isfinite(f.metrics.rmse));
  }
}

TEST_CASE("run_cv: loocv over six groups and the output tables") {
  std::vector<std::string> groups;
  for (int gi = 0; gi < 6; ++gi)
    for (int k = 0; k < 5; ++k) groups.push_back("G" + std::to_string(gi));
  const RegionGraph g = grouped_path(groups);
  const Matrix x = oracle::random_matrix(30, 3, 2);
  const Vector y = x.col(0) + 0.5 * x.col(2);
  nn::ModelSpec spec;
  spec.hidden1 = 8;
  spec.hidden2 = 4;
  nn::TrainConfig cfg;
  cfg.epochs = 15;
  cfg.lr = 0.01;
  CvOptions opt;
  opt.scheme = CvScheme::loocv;
  opt.hops = 1;
  opt.seed = 8;
  const CvResult r = run_cv(g, x, y, spec, cfg, opt);
  REQUIRE(r.folds.size() == 6);
  CHECK(r.scheme == "loocv");
  CHECK(r.model == "gatv2");
  for (std::size_t f = 0; f < 6; ++f) CHECK(r.folds[f].test_nodes.size() == 5);

  const std::string res = results_csv(r);
  CHECK(res.rfind("fold,metric,value\n0,rmse,", 0) == 0);
  CHECK(std::count(res.begin(), res.end(), '\n') == 1 + 18);
  const std::string pred = predictions_csv(r, g, y);
  CHECK(pred.rfind("id,y,yhat,fold\nn0,", 0) == 0);
  CHECK(std::count(pred.begin(), pred.end(), '\n') == 31);
  const auto j = summary_json(r);
  CHECK(j["folds"] == 6);
  CHECK(j["aggregate"]["r2"]["formatted"].get<std::string>() == format_mean_std(r.r2));
  CHECK(j["config"]["hops"] == 1);
  CHECK_FALSE(j.contains("search"));

  CvOptions only = opt;
  only.groups = {"G2"};
  CHECK(run_cv(g, x, y, spec, cfg, only).folds.size() == 1);
  only.groups = {"nope"};
  CHECK(code_of([&] { run_cv(g, x, y, spec, cfg, only); }) == ErrorCode::UnknownGroup);
  CHECK(code_of([&] { make_folds(oracle::path_graph(12), opt); }) == ErrorCode::UnknownGroup);
}

TEST_CASE("run_cv: determinism and search log") {
  const RegionGraph g = grid_graph(5, 5);
  const Matrix x = oracle::random_matrix(25, 2, 3);
  const Vector y = x.col(0);
  nn::ModelSpec spec;
  nn::TrainConfig cfg;
  CvOptions opt;
  opt.seed = 6;
  opt.search_rounds = 2;
  opt.space.hidden1 = {8};
  opt.space.hidden2 = {4};
  opt.space.epochs = {5};
  const CvResult a = run_cv(g, x, y, spec, cfg, opt);
  const CvResult b = run_cv(g, x, y, spec, cfg, opt);
  CHECK(results_csv(a) == results_csv(b));
  CHECK(summary_json(a).dump() == summary_json(b).dump());
  CHECK(a.search["trials"].size() == 2);
  CHECK(a.config["model"]["hidden1"] == 8);
}

TEST_CASE("enum names round trip") {
  CHECK(scheme_from_string("loocv") == CvScheme::loocv);
  CHECK(scheme_from_string("10fold") == CvScheme::tenfold);
  CHECK(buffer_role_from_string(to_string(BufferRole::excluded)) == BufferRole::excluded);
  CHECK(baseline_from_string("gwr") == BaselineKind::gwr);
  CHECK(code_of([] { scheme_from_string("kfold"); }) == ErrorCode::InvalidConfig);
}

namespace {

AblationOptions quick_ablation(std::uint64_t seed) {
  AblationOptions o;
  o.budget = 1;
  o.seed = seed;
  o.resamples = 2;
  o.space.lr = {0.01};
  o.space.weight_decay = {0.0};
  o.space.hidden1 = {16};
  o.space.hidden2 = {8};
  o.space.dropout = {0.0};
  o.space.epochs = {250};
  o.space.optimizer = {nn::OptimizerKind::adam};
  o.space.patience = {30};
  return o;
}

}  // namespace

TEST_CASE("ablation: single-option axes give one row per axis") {
  const RegionGraph g = oracle::cycle_graph(20);
  const Matrix x = oracle::random_matrix(20, 2, 1);
  const Vector y = x.col(0);
  AblationAxes axes{{nn::Architecture::gcn}, {{"1-hop", g}}, {1}, {{"none", Matrix(20, 0)}}};
  AblationOptions o = quick_ablation(2);
  o.space.epochs = {5};
  const AblationResult r = ablation_grid(x, y, Mask(20, true), axes, {}, {}, o);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) CHECK(row.winner);
  CHECK(r.best_graph == "1-hop");
  CHECK(r.best_depth == 1);
  CHECK(ablation_csv(r).rfind("axis,option,architecture,graph,depth,encoding,mean_val_r2,winner\n", 0) == 0);

  AblationAxes empty = axes;
  empty.depths.clear();
  CHECK(code_of([&] { ablation_grid(x, y, Mask(20, true), empty, {}, {}, o); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("ablation: planted 2-hop signal prefers the 2-hop graph") {
  // y_i is the mean of x over the closed 2-hop ball on a cycle; one GCN
  // layer on the 1-hop graph sees only three of the five terms
  const Index n = 120;
  const RegionGraph one = oracle::cycle_graph(n);
  const RegionGraph two = khop_expand(one, 2);
  const Matrix x = oracle::random_matrix(n, 1, 17);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Index d = -2; d <= 2; ++d) s += x((i + d + n) % n, 0);
    y(i) = s / 5.0;
  }
  AblationAxes axes{{nn::Architecture::gcn}, {{"1-hop", one}, {"2-hop", two}}, {1}, {{"none", Matrix(n, 0)}}};
  nn::ModelSpec spec;
  spec.activation = nn::Activation::leaky_relu;
  const AblationResult r = ablation_grid(x, y, Mask(static_cast<std::size_t>(n), true), axes, spec, {},
                                         quick_ablation(3));
  CHECK(r.best_graph == "2-hop");
  double r1 = 0, r2 = 0;
  for (const auto& row : r.rows)
    if (row.axis == "graph") (row.option == "1-hop" ? r1 : r2) = row.mean_val_r2;
  INFO("1-hop ", r1, " 2-hop ", r2);
  CHECK(r2 > r1 + 0.1);
}
