#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "geohealth/baselines.hpp"
#include "geohealth/spatial_cv/metrics.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace geohealth;
using namespace geohealth::baselines;

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

RegionGraph grid(int rows, int cols) {
  const Matrix a = oracle::grid_queen_adjacency(rows, cols);
  std::vector<Region> regions;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      regions.push_back(oracle::point_region("r" + std::to_string(r) + "c" + std::to_string(c), c, r));
  std::vector<RegionGraph::Edge> e;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0) e.emplace_back(i, j);
  return RegionGraph(std::move(regions), e);
}

Matrix row_standardize(Matrix a) {
  for (Index i = 0; i < a.rows(); ++i) {
    const double d = a.row(i).sum();
    if (d > 0) a.row(i) /= d;
  }
  return a;
}

// y = (I - rho W)^-1 (b0 + X b + e)
Vector simulate_slm(const Matrix& w, const Matrix& x, double rho, double b0, const Vector& b, double noise,
                    std::uint64_t seed) {
  const Index n = w.rows();
  const Vector e = noise * oracle::random_matrix(n, 1, seed).col(0);
  const Vector rhs = (x * b).array() + b0 + e.array();
  return (Matrix::Identity(n, n) - rho * w).partialPivLu().solve(rhs);
}

// Concentrated log-likelihood up to a constant, from first principles.
double dense_slm_loglik(double rho, const Matrix& w, const Matrix& x, const Vector& y) {
  const Index n = w.rows();
  const Vector yr = y - rho * w * y;
  const auto fit = oracle::ols(x, yr);
  Matrix design(n, x.cols() + 1);
  design << Matrix::Ones(n, 1), x;
  const double sse = (yr - design * fit.beta).squaredNorm();
  const double logdet = std::log(std::abs((Matrix::Identity(n, n) - rho * w).determinant()));
  return -0.5 * static_cast<double>(n) * std::log(sse / static_cast<double>(n)) + logdet;
}

}  // namespace

TEST_CASE("ols: worked example") {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  Vector y(4);
  y << 1, 3, 5, 7;
  const OlsFit f = ols_fit(x, y);
  CHECK(f.coefficients(0) == doctest::Approx(1.0));
  CHECK(f.coefficients(1) == doctest::Approx(2.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  Matrix q(1, 1);
  q << 10;
  CHECK(f.predict(q)(0) == doctest::Approx(21.0));
}

TEST_CASE("ols: matches normal equations on 50 x 3") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix x = oracle::random_matrix(50, 3, seed);
    const Vector y = oracle::random_matrix(50, 1, seed + 40).col(0) + x.col(1);
    const OlsFit f = ols_fit(x, y);
    const auto o = oracle::ols(x, y);
    CHECK((f.coefficients - o.beta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(f.r2 - o.r2) < 1e-8);
  }
}

TEST_CASE("ols: rank deficiency") {
  Matrix x = oracle::random_matrix(10, 2, 3);
  x.col(1) = 2.0 * x.col(0);
  CHECK(code_of([&] { ols_fit(x, Vector::Ones(10)); }) == ErrorCode::RankDeficient);
  CHECK(code_of([&] { ols_fit(oracle::random_matrix(3, 3, 1), Vector::Ones(3)); }) == ErrorCode::RankDeficient);
}

TEST_CASE("row-standardised weights") {
  const RegionGraph g = oracle::from_edges(4, {{0, 1}, {0, 2}});
  const SpatialWeights w = row_standardized_weights(g);
  CHECK(w.w(0, 1) == doctest::Approx(0.5));
  CHECK(w.w(1, 0) == doctest::Approx(1.0));
  CHECK(w.w.row(3).cwiseAbs().sum() == 0.0);
  const RegionGraph r = oracle::random_graph(30, 0.2, 4);
  const Matrix wr = row_standardized_weights(r).w;
  CHECK((wr - row_standardize(oracle::dense_adjacency(r))).cwiseAbs().maxCoeff() < 1e-15);
  for (Index i = 0; i < wr.rows(); ++i) CHECK(wr.row(i).sum() == doctest::Approx(1.0));
}

TEST_CASE("slm: no spatial lag recovers rho near zero") {
  const RegionGraph g = grid(20, 20);
  const Matrix w = row_standardize(oracle::dense_adjacency(g));
  const Matrix x = oracle::random_matrix(400, 2, 8);
  Vector b(2);
  b << 1, 2;
  const Vector y = simulate_slm(w, x, 0.0, 0.5, b, 0.5, 9);
  const SlmFit f = slm_fit(g, x, y);
  CHECK(std::abs(f.rho) < 0.05);
}

TEST_CASE("slm: recovers rho = 0.6 and beta on N = 400") {
  const RegionGraph g = grid(20, 20);
  const Matrix w = row_standardize(oracle::dense_adjacency(g));
  const Matrix x = oracle::random_matrix(400, 2, 11);
  Vector b(2);
  b << 1, 2;
  const Vector y = simulate_slm(w, x, 0.6, 0.0, b, 0.5, 12);
  const SlmFit f = slm_fit(g, x, y);
  CHECK(std::abs(f.rho - 0.6) < 0.05);
  CHECK(std::abs(f.coefficients(1) - 1.0) < 0.1);
  CHECK(std::abs(f.coefficients(2) - 2.0) < 0.1);
  CHECK(f.rho > f.rho_lower);
  CHECK(f.rho < f.rho_upper);
  CHECK(f.rho_upper == doctest::Approx(1.0));

  // coefficients are the OLS fit of the filtered target at rho-hat
  const auto o = oracle::ols(x, y - f.rho * w * y);
  CHECK((f.coefficients - o.beta).cwiseAbs().maxCoeff() < 1e-8);

  // the estimate is at least as likely as any of 21 interior grid points
  const double at = dense_slm_loglik(f.rho, w, x, y);
  for (int k = 0; k <= 20; ++k) {
    const double rho = f.rho_lower + (f.rho_upper - f.rho_lower) * (0.02 + 0.96 * k / 20.0);
    CHECK(at >= dense_slm_loglik(rho, w, x, y) - 1e-9);
  }

  const Vector pred = slm_predict(f, g, x);
  Matrix design(400, 3);
  design << Matrix::Ones(400, 1), x;
  const Vector expect = (Matrix::Identity(400, 400) - f.rho * w).partialPivLu().solve(design * f.coefficients);
  CHECK((pred - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("slm: likelihood differences agree with the dense oracle") {
  const RegionGraph g = oracle::random_graph(40, 0.1, 3);
  const Matrix w = row_standardize(oracle::dense_adjacency(g));
  const Matrix x = oracle::random_matrix(40, 2, 5);
  Vector b(2);
  b << -1, 0.5;
  const Vector y = simulate_slm(w, x, 0.3, 1.0, b, 0.3, 6);
  Matrix design(40, 3);
  design << Matrix::Ones(40, 1), x;
  const auto e_of = [&](const Vector& v) { return Vector(v - design * oracle::ols(x, v).beta); };
  const Vector e0 = e_of(y), el = e_of(w * y);
  const Eigen::EigenSolver<Matrix> es(w);
  Vector eig = es.eigenvalues().real();
  std::sort(eig.data(), eig.data() + eig.size());
  const double base = slm_log_likelihood(0.0, e0, el, eig) - dense_slm_loglik(0.0, w, x, y);
  for (double rho : {-0.5, -0.1, 0.2, 0.45, 0.8})
    CHECK(slm_log_likelihood(rho, e0, el, eig) - dense_slm_loglik(rho, w, x, y) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("slm: isolated regions and degenerate input") {
  std::vector<std::pair<Index, Index>> e;
  for (Index i = 0; i + 1 < 28; ++i) e.emplace_back(i, i + 1);
  const RegionGraph g = oracle::from_edges(30, e);  // nodes 28 and 29 isolated
  const Matrix x = oracle::random_matrix(30, 1, 2);
  const Vector y = 2.0 * x.col(0) + 0.3 * oracle::random_matrix(30, 1, 3).col(0);
  const SlmFit f = slm_fit(g, x, y);
  CHECK(std::isfinite(f.rho));
  CHECK(f.fitted.allFinite());
  CHECK(code_of([&] { slm_fit(g, x, Vector::Ones(30)); }) == ErrorCode::DegenerateData);
}

TEST_CASE("gwr: kernel weight") {
  CHECK(gwr_weight(0.0, 2.0) == 1.0);
  CHECK(gwr_weight(2.0, 2.0) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("gwr: huge bandwidth reduces to OLS") {
  const Index n = 40;
  std::vector<Point> locs;
  for (Index i = 0; i < n; ++i) locs.push_back({static_cast<double>(i % 8), static_cast<double>(i / 8)});
  const Matrix x = oracle::random_matrix(n, 2, 7);
  const Vector y = x.col(0) - x.col(1) + 0.2 * oracle::random_matrix(n, 1, 8).col(0);
  GwrConfig c;
  c.bandwidth = 1e9;
  const GwrFit f = gwr_fit_predict(locs, x, y, c);
  const auto o = oracle::ols(x, y);
  for (Index i = 0; i < n; ++i) CHECK((f.coefficients.row(i).transpose() - o.beta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(f.bandwidth == 1e9);
}

TEST_CASE("gwr: two clusters with different slopes") {
  std::vector<Point> locs;
  const Matrix x = oracle::random_matrix(80, 1, 21);
  Vector y(80);
  for (Index i = 0; i < 80; ++i) {
    const bool right = i >= 40;
    locs.push_back({(right ? 100.0 : 0.0) + static_cast<double>(i % 8), static_cast<double>((i % 40) / 8)});
    y(i) = (right ? 3.0 : 1.0) * x(i, 0);
  }
  GwrConfig c;
  c.candidates = {2.0};
  const GwrFit f = gwr_fit_predict(locs, x, y, c);
  CHECK(f.bandwidth == 2.0);
  CHECK(f.candidate_scores.size() == 1);
  for (Index i = 0; i < 80; ++i) {
    const double want = i >= 40 ? 3.0 : 1.0;
    CHECK(std::abs(f.coefficients(i, 1) - want) < 0.1 * want);
  }
}

TEST_CASE("gwr: bandwidth selection picks the smallest leave-one-out error") {
  std::vector<Point> locs;
  for (int i = 0; i < 36; ++i) locs.push_back({static_cast<double>(i % 6), static_cast<double>(i / 6)});
  const Matrix x = oracle::random_matrix(36, 1, 4);
  Vector y(36);
  for (Index i = 0; i < 36; ++i) y(i) = (1.0 + 0.3 * locs[static_cast<std::size_t>(i)].x) * x(i, 0);
  const GwrFit ladder = gwr_fit_predict(locs, x, y, {});
  REQUIRE(!ladder.candidate_scores.empty());
  const double best = *std::min_element(ladder.candidate_scores.begin(), ladder.candidate_scores.end());
  CHECK(ladder.bandwidth > 0.0);
  GwrConfig fixed;
  fixed.bandwidth = ladder.bandwidth;
  CHECK(gwr_fit_predict(locs, x, y, fixed).predictions == ladder.predictions);
  CHECK(std::isfinite(best));

  GwrConfig c;
  c.candidates = {1.0, 1.0};
  const GwrFit tie = gwr_fit_predict(locs, x, y, c);
  CHECK(tie.candidate_scores[0] == tie.candidate_scores[1]);
  CHECK(tie.bandwidth == 1.0);

  GwrConfig bad;
  bad.bandwidth = -1.0;
  CHECK(code_of([&] { gwr_fit_predict(locs, x, y, bad); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("gwr_predict at training locations equals the in-sample fit") {
  std::vector<Point> locs;
  for (int i = 0; i < 25; ++i) locs.push_back({static_cast<double>(i % 5), static_cast<double>(i / 5)});
  const Matrix x = oracle::random_matrix(25, 2, 31);
  const Vector y = x.col(0) + oracle::random_matrix(25, 1, 32).col(0);
  GwrConfig c;
  c.bandwidth = 1.5;
  const GwrFit f = gwr_fit_predict(locs, x, y, c);
  const Vector p = gwr_predict(locs, x, y, locs, x, 1.5);
  CHECK((p - f.predictions).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("external predictions") {
  const RegionGraph g = oracle::path_graph(3);
  scratch::Dir dir("ext");
  dir.write("p.csv", "id,yhat\nn2,3\nn0,1\nn1,2\n");
  const Vector p = import_external_predictions(dir / "p.csv", g);
  CHECK(p == Vector::LinSpaced(3, 1, 3));
  CHECK(cv::compute_metrics(p, p).r2 == 1.0);
  CHECK(cv::compute_metrics(Vector::Constant(3, 7.0), p).r2 <= 0.0);
  CHECK(cv::compute_metrics(Vector::Constant(3, 2.0), p).r2 == doctest::Approx(0.0));

  dir.write("q.csv", "id,yhat\nn0,1\nn1,2\n");
  try {
    import_external_predictions(dir / "q.csv", g);
    FAIL("expected MissingRegion");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingRegion);
    CHECK(std::string(e.what()).find("n2") != std::string::npos);
  }
}
