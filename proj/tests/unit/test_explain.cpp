#include <algorithm>
#include <cmath>

#include "dense_model.hpp"
#include "doctest.h"
#include "geohealth/explain.hpp"
#include "geohealth/nn/train.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace geohealth;
using namespace geohealth::explain;

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

nn::TrainedModel quick_model(const nn::MessageGraph& mg, const Matrix& x, const Vector& y, int hidden2) {
  nn::ModelSpec s;
  s.architecture = nn::Architecture::gcn;
  s.hidden1 = 8;
  s.hidden2 = hidden2;
  nn::TrainConfig c;
  c.epochs = 3;
  return nn::train(s, mg, x, y, Mask(static_cast<std::size_t>(x.rows()), true), {}, c);
}

// Independent oracle: descending eigenvalue ratios of the sample covariance.
std::vector<double> oracle_ratios(const Matrix& x) {
  const auto e = oracle::jacobi_eigen(oracle::covariance(x));
  std::vector<double> v(e.values.data(), e.values.data() + e.values.size());
  std::sort(v.rbegin(), v.rend());
  double total = 0.0;
  for (double a : v) total += std::max(a, 0.0);
  for (double& a : v) a = std::max(a, 0.0) / total;
  return v;
}

}  // namespace

TEST_CASE("extract_embeddings: width, eval mode and the untrained guard") {
  const RegionGraph g = oracle::from_edges(6, {{0, 1}, {1, 2}});
  const nn::MessageGraph mg = nn::make_message_graph(g);
  Matrix x = oracle::random_matrix(6, 3, 4);
  x.row(4) = x.row(3);
  x.row(5) = x.row(3);  // three isolated nodes with identical features
  const Vector y = x.col(0);
  const nn::TrainedModel m = quick_model(mg, x, y, 12);
  const Matrix e = extract_embeddings(m, mg, x);
  CHECK(e.rows() == 6);
  CHECK(e.cols() == 12);
  CHECK((e.row(3) - e.row(4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((e.row(4) - e.row(5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(e == extract_embeddings(m, mg, x));
  CHECK((e - dense::model(m.spec, m.parameters, g, x).embedding).cwiseAbs().maxCoeff() < 1e-10);

  nn::TrainedModel blank = m;
  blank.training_log.clear();
  CHECK(code_of([&] { extract_embeddings(blank, mg, x); }) == ErrorCode::UntrainedModel);
}

TEST_CASE("pca_embeddings: smallest n reaching the target") {
  // axis variances 5, 3, 1.5, 0.5 -> ratios 0.5, 0.3, 0.15, 0.05
  Matrix x = oracle::random_matrix(2000, 4, 8);
  for (Index c = 0; c < 4; ++c) x.col(c) = (x.col(c).array() - x.col(c).mean()) / std::sqrt(oracle::covariance(x.col(c))(0, 0));
  const double sd[4] = {std::sqrt(5.0), std::sqrt(3.0), std::sqrt(1.5), std::sqrt(0.5)};
  for (Index c = 0; c < 4; ++c) x.col(c) *= sd[c];
  const auto want = oracle_ratios(x);
  const PcaSelection p = pca_embeddings(x, 0.8);
  REQUIRE(p.ratios.size() == 4);
  for (Index k = 0; k < 4; ++k) CHECK(std::abs(p.ratios(k) - want[static_cast<std::size_t>(k)]) < 1e-9);
  int n = 0;
  double cum = 0.0;
  while (cum < 0.8) cum += want[static_cast<std::size_t>(n++)];
  CHECK(p.n_selected == n);
  CHECK(p.scores.cols() == n);
  CHECK(p.loadings.rows() == 4);
  CHECK(pca_embeddings(x, 0.99).n_selected == 4);
  CHECK(pca_embeddings(x, 0.3).n_selected == 1);
}

TEST_CASE("pca_embeddings: rank-1 data selects one component") {
  const Vector t = oracle::random_matrix(30, 1, 2).col(0);
  Matrix x(30, 3);
  x << t, -2.0 * t, 0.5 * t;
  const PcaSelection p = pca_embeddings(x);
  CHECK(p.n_selected == 1);
  CHECK(p.ratios(0) == doctest::Approx(1.0));
}

TEST_CASE("pca_embeddings: 30 x 5 scores against the oracle, orthogonality") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Matrix x = oracle::random_matrix(30, 5, seed);
    x.col(1) += 2.0 * x.col(0);
    const PcaSelection p = pca_embeddings(x, 0.999);
    const Matrix want = oracle::pca_scores(x, p.n_selected);
    CHECK(oracle::max_diff_up_to_sign(p.scores, want) < 1e-8);
    const Matrix gram = p.loadings.transpose() * p.loadings;
    CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
    const Matrix sc = p.scores.transpose() * p.scores;
    for (Index i = 0; i < sc.rows(); ++i)
      for (Index j = 0; j < sc.cols(); ++j)
        if (i != j) CHECK(std::abs(sc(i, j)) < 1e-8 * sc.trace());
  }
}

TEST_CASE("pca_embeddings: degenerate inputs") {
  CHECK(code_of([] { pca_embeddings(Matrix::Ones(5, 3)); }) == ErrorCode::DegenerateData);
  CHECK(code_of([] { pca_embeddings(Matrix::Ones(1, 3)); }) == ErrorCode::TooFewRows);
  CHECK_THROWS_AS(pca_embeddings(oracle::random_matrix(5, 2, 1), 1.5), Error);
}

TEST_CASE("correlations: planted copy, sign flip, bounds") {
  const Matrix scores = oracle::random_matrix(500, 2, 3);
  Matrix f(500, 3);
  f.col(0) = oracle::random_matrix(500, 1, 4).col(0);
  f.col(1) = scores.col(0) + 0.1 * oracle::random_matrix(500, 1, 5).col(0);
  f.col(2) = -scores.col(1);
  const PcCorrelations c = pc_feature_correlations(scores, f, {"noise", "copy", "neg"});
  CHECK(std::abs(c.r(0, 1)) > 0.9);
  CHECK(c.r(1, 2) == doctest::Approx(-1.0));
  CHECK(c.ranked[0][0].name == "copy");
  CHECK(c.ranked[1][0].name == "neg");
  CHECK(c.ranked[0][0].source == "feature");
  for (Index i = 0; i < c.r.rows(); ++i)
    for (Index j = 0; j < c.r.cols(); ++j) {
      CHECK(std::abs(c.r(i, j)) <= 1.0 + 1e-12);
      CHECK(c.r(i, j) == doctest::Approx(oracle::pearson(scores.col(i), f.col(j))).epsilon(1e-10));
    }
  const std::string csv = correlations_csv(c);
  CHECK(csv.rfind("pc,feature,source,r,rank\npc1,copy,feature,", 0) == 0);

  Diagnostics d;
  Matrix k = f;
  k.col(0).setConstant(2.0);
  const PcCorrelations z = pc_feature_correlations(scores, k, {"const", "copy", "neg"}, {"a", "b", "c"}, &d);
  CHECK(z.r(0, 0) == 0.0);
  CHECK_FALSE(d.warnings.empty());
  CHECK(z.ranked[0][0].source == "b");
}

TEST_CASE("pc_outcome_regression") {
  const Matrix s = oracle::random_matrix(200, 2, 6);
  const Vector y = (2.0 * s.col(0) - s.col(1)).array() + 0.5;
  const PcRegression r = pc_outcome_regression(s, y);
  CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.coefficients(0) - 0.5) < 1e-9);
  CHECK(std::abs(r.coefficients(1) - 2.0) < 1e-9);
  CHECK(std::abs(r.coefficients(2) + 1.0) < 1e-9);

  const Matrix big = oracle::random_matrix(1000, 2, 9);
  const Vector noise = oracle::random_matrix(1000, 1, 10).col(0);
  CHECK(pc_outcome_regression(big, noise).r2 < 0.05);

  Diagnostics d;
  const Vector y1 = 3.0 * s.col(0);
  const PcRegression one = pc_outcome_regression(s.leftCols(1), y1, &d);
  CHECK(one.coefficients(1) == doctest::Approx(3.0));
  CHECK(d.warnings.size() == 1);
}

TEST_CASE("residual_diagnostics") {
  Vector y(4), yhat = Vector::Zero(4);
  y << 1, -1, 1, -1;
  const ResidualStats r = residual_diagnostics(yhat, y);
  CHECK(r.mean == doctest::Approx(0.0));
  CHECK(r.std == doctest::Approx(1.0));
  CHECK(r.bin_edges.size() == 31);
  CHECK(r.counts.size() == 30);
  CHECK(r.counts.front() == 2);
  CHECK(r.counts.back() == 2);
  CHECK(r.bin_edges.front() == -1.0);
  CHECK(r.bin_edges.back() == 1.0);

  const ResidualStats masked = residual_diagnostics(yhat, y, {true, false, true, false});
  CHECK(masked.mean == doctest::Approx(1.0));
  CHECK(std::isnan(masked.residuals(1)));
  std::size_t total = 0;
  for (auto c : masked.counts) total += c;
  CHECK(total == 2);

  CHECK(code_of([&] { residual_diagnostics(yhat, y, Mask(4, false)); }) == ErrorCode::EmptyMask);

  const Vector v = oracle::random_matrix(40, 1, 3).col(0);
  const ResidualStats same = residual_diagnostics(v, v);
  CHECK(same.mean == 0.0);
  CHECK(same.std == 0.0);
  CHECK(same.counts.size() == 30);
}

TEST_CASE("export_geo_layers") {
  const RegionGraph pts = oracle::path_graph(3);
  const Matrix s = oracle::random_matrix(3, 2, 1);
  Vector y(3), yhat(3);
  y << 1, 2, 3;
  yhat << 1.5, 2, 2;
  Diagnostics d;
  const GeoLayers l = export_geo_layers(pts, s, yhat, y, {true, false, true}, &d);
  CHECK_FALSE(l.geojson.has_value());
  CHECK(d.warnings.size() == 1);
  CHECK(l.csv.rfind("id,pc1,pc2,residual,yhat,y,missing\n", 0) == 0);
  CHECK(l.csv.find(",,,true\n") != std::string::npos);
  CHECK(l.csv.find("n0,") != std::string::npos);
  CHECK(std::count(l.csv.begin(), l.csv.end(), '\n') == 4);

  std::vector<Region> squares;
  for (int i = 0; i < 3; ++i) squares.push_back(oracle::square_region("s" + std::to_string(i), i, 0));
  const RegionGraph poly(squares, {{0, 1}, {1, 2}});
  const GeoLayers gl = export_geo_layers(poly, s, yhat, y, {true, false, true});
  REQUIRE(gl.geojson.has_value());
  const auto& feats = (*gl.geojson)["features"];
  CHECK(feats.size() == 3);
  CHECK(feats[1]["properties"]["missing"] == true);
  CHECK(feats[1]["properties"]["y"].is_null());
  CHECK(feats[0]["properties"]["residual"] == doctest::Approx(-0.5));

  ReportInputs rep;
  rep.pca = pca_embeddings(oracle::random_matrix(3, 2, 1), 0.8);
  rep.correlations = pc_feature_correlations(rep.pca.scores, oracle::random_matrix(3, 2, 2), {"a", "b"});
  rep.regression = pc_outcome_regression(oracle::random_matrix(3, 1, 3), y);
  rep.residuals = residual_diagnostics(yhat, y);
  rep.layers = gl;
  scratch::Dir dir("report");
  write_report(dir.path(), poly, rep);
  for (const char* f : {"ratios.csv", "scores.csv", "loadings.csv", "correlations.csv", "pc_regression.json",
                        "residuals.csv", "residual_histogram.csv", "residual_stats.json", "layers.csv",
                        "layers.geojson"})
    CHECK(std::filesystem::exists(dir / f));
  CHECK(render_report(poly, rep).size() == 10);
}
