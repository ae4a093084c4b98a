#include "geohealth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "geohealth/csv.hpp"
#include "geohealth/linalg.hpp"

namespace geohealth::baselines {

SpatialWeights row_standardized_weights(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  SpatialWeights sw{Matrix::Zero(n, n)};
  for (Index i = 0; i < n; ++i) {
    const auto nb = graph.neighbors(i);
    if (nb.empty()) continue;
    const double w = 1.0 / static_cast<double>(nb.size());
    for (Index j : nb) sw.w(i, j) = w;
  }
  return sw;
}

Vector OlsFit::predict(const Matrix& x) const { return linalg::with_intercept(x) * coefficients; }

OlsFit ols_fit(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw Error(ErrorCode::ShapeMismatch, "ols: X and y row counts differ");
  if (x.rows() <= x.cols())
    throw Error(ErrorCode::RankDeficient, "ols needs more rows (" + std::to_string(x.rows()) + ") than features (" +
                                              std::to_string(x.cols()) + ")");
  const Matrix design = linalg::with_intercept(x);
  const linalg::LeastSquares ls = linalg::least_squares(design, y);
  if (ls.rank < design.cols())
    throw Error(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(ls.rank) + " of " +
                                              std::to_string(design.cols()));
  OlsFit fit;
  fit.coefficients = ls.coefficients;
  fit.fitted = ls.fitted;
  fit.r2 = ls.ss_tot > 0 ? 1.0 - ls.ss_res / ls.ss_tot : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

// ---------------------------------------------------------------------------

double slm_log_likelihood(double rho, const Vector& e0, const Vector& e_lag, const Vector& eigenvalues) {
  const auto n = static_cast<double>(e0.size());
  double logdet = 0.0;
  for (Index k = 0; k < eigenvalues.size(); ++k) {
    const double t = 1.0 - rho * eigenvalues(k);
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    logdet += std::log(t);
  }
  const double sse = (e0 - rho * e_lag).squaredNorm();
  if (!(sse > 0.0)) return std::numeric_limits<double>::infinity();
  return -0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0) - 0.5 * n * std::log(sse / n) + logdet;
}

namespace {

Vector weight_eigenvalues(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  Matrix s = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j : graph.neighbors(i))
      s(i, j) = 1.0 / std::sqrt(static_cast<double>(graph.degree(i)) * static_cast<double>(graph.degree(j)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

SlmFit slm_fit(const RegionGraph& graph, const Matrix& x, const Vector& y) {
  const auto n = static_cast<Index>(graph.size());
  if (x.rows() != n || y.size() != n) throw Error(ErrorCode::ShapeMismatch, "slm: inputs not aligned with the graph");
  if (!y.allFinite()) throw Error(ErrorCode::InvalidArgument, "slm: non-finite target values");
  if ((y.array() - y.mean()).abs().maxCoeff() == 0.0) throw Error(ErrorCode::DegenerateData, "slm: target is constant");

  const SpatialWeights w = row_standardized_weights(graph);
  const Vector wy = w.w * y;
  const Matrix design = linalg::with_intercept(x);
  if (n <= design.cols()) throw Error(ErrorCode::RankDeficient, "slm needs more rows than coefficients");
  const linalg::LeastSquares fit0 = linalg::least_squares(design, y);
  const linalg::LeastSquares fitl = linalg::least_squares(design, wy);
  if (fit0.rank < design.cols()) throw Error(ErrorCode::RankDeficient, "slm design matrix is rank deficient");
  const Vector e0 = y - fit0.fitted;
  const Vector el = wy - fitl.fitted;

  SlmFit out;
  out.eigenvalues = weight_eigenvalues(graph);
  const double lmin = out.eigenvalues.minCoeff();
  const double lmax = out.eigenvalues.maxCoeff();
  out.rho_lower = lmin < -1e-12 ? 1.0 / lmin : -1.0;
  out.rho_upper = lmax > 1e-12 ? 1.0 / lmax : 1.0;

  auto ll = [&](double rho) { return slm_log_likelihood(rho, e0, el, out.eigenvalues); };
  double rho = 0.0;
  if (graph.edge_count() > 0) {
    constexpr int cells = 200;
    const double lo = out.rho_lower, hi = out.rho_upper, step = (hi - lo) / cells;
    int best_k = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < cells; ++k) {
      const double v = ll(lo + step * k);
      if (std::isfinite(v) && v > best) {
        best = v;
        best_k = k;
      }
    }
    if (best_k < 0) throw Error(ErrorCode::NonConvergence, "slm likelihood is not finite anywhere on the search grid");
    double a = lo + step * (best_k - 1), b = lo + step * (best_k + 1);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = ll(c), fd = ll(d);
    int iter = 0;
    while (b - a > 1e-6) {
      if (++iter > 200) throw Error(ErrorCode::NonConvergence, "slm golden-section search did not converge");
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = ll(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = ll(d);
      }
    }
    const double refined = 0.5 * (a + b);
    rho = ll(refined) >= best ? refined : lo + step * best_k;
  }

  out.rho = rho;
  out.coefficients = fit0.coefficients - rho * fitl.coefficients;
  out.log_likelihood = ll(rho);
  out.sigma2 = (e0 - rho * el).squaredNorm() / static_cast<double>(n);
  out.fitted = rho * wy + design * out.coefficients;
  const auto r = linalg::pearson(out.fitted, y);
  out.r2 = r ? (*r) * (*r) : 0.0;
  return out;
}

Vector slm_predict(const SlmFit& fit, const RegionGraph& graph, const Matrix& x) {
  const auto n = static_cast<Index>(graph.size());
  if (x.rows() != n || x.cols() + 1 != fit.coefficients.size())
    throw Error(ErrorCode::ShapeMismatch, "slm_predict: inputs do not match the fit");
  const Matrix a = Matrix::Identity(n, n) - fit.rho * row_standardized_weights(graph).w;
  return Eigen::PartialPivLU<Matrix>(a).solve(linalg::with_intercept(x) * fit.coefficients);
}

// ---------------------------------------------------------------------------

void GwrConfig::validate() const {
  if (bandwidth && !(*bandwidth > 0.0)) throw Error(ErrorCode::InvalidConfig, "gwr bandwidth must be positive");
  if (adaptive_k && *adaptive_k < 1) throw Error(ErrorCode::InvalidConfig, "gwr adaptive k must be >= 1");
  for (double c : candidates)
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "gwr candidate bandwidths must be positive");
}

double gwr_weight(double distance, double bandwidth) {
  return std::exp(-(distance * distance) / (2.0 * bandwidth * bandwidth));
}

std::vector<Point> centroids(const RegionGraph& graph) {
  std::vector<Point> out;
  out.reserve(graph.size());
  for (const Region& r : graph.regions()) out.push_back(r.centroid);
  return out;
}

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Local coefficients at `at`; nullopt when the weighted design loses rank.
std::optional<Vector> local_fit(const std::vector<Point>& locs, const Matrix& design, const Vector& y, const Point& at,
                                double bw, Index exclude) {
  Vector w(design.rows());
  for (Index j = 0; j < design.rows(); ++j)
    w(j) = j == exclude ? 0.0 : gwr_weight(distance(at, locs[static_cast<std::size_t>(j)]), bw);
  const linalg::LeastSquares ls = linalg::weighted_least_squares(design, y, w);
  if (ls.rank < design.cols() || !ls.coefficients.allFinite()) return std::nullopt;
  return ls.coefficients;
}

double kth_neighbor_distance(const std::vector<Point>& locs, std::size_t i, int k) {
  std::vector<double> d;
  for (std::size_t j = 0; j < locs.size(); ++j)
    if (j != i) d.push_back(distance(locs[i], locs[j]));
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size()) - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
  return d[kk];
}

std::vector<double> default_candidates(const std::vector<Point>& locs) {
  double nearest = std::numeric_limits<double>::infinity();
  double minx = std::numeric_limits<double>::infinity(), maxx = -minx, miny = minx, maxy = -minx;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    minx = std::min(minx, locs[i].x);
    maxx = std::max(maxx, locs[i].x);
    miny = std::min(miny, locs[i].y);
    maxy = std::max(maxy, locs[i].y);
    for (std::size_t j = i + 1; j < locs.size(); ++j) {
      const double d = distance(locs[i], locs[j]);
      if (d > 0) nearest = std::min(nearest, d);
    }
  }
  const double diag = std::hypot(maxx - minx, maxy - miny);
  if (!std::isfinite(nearest) || !(diag > 0)) return {1.0};
  std::vector<double> out;
  constexpr int steps = 20;
  for (int s = 0; s < steps; ++s) out.push_back(nearest * std::pow(diag / nearest, static_cast<double>(s) / (steps - 1)));
  return out;
}

}  // namespace

GwrFit gwr_fit_predict(const std::vector<Point>& locations, const Matrix& x, const Vector& y, GwrConfig config,
                       Diagnostics* diag) {
  config.validate();
  const auto n = static_cast<Index>(locations.size());
  if (x.rows() != n || y.size() != n) throw Error(ErrorCode::ShapeMismatch, "gwr: inputs not aligned");
  const Matrix design = linalg::with_intercept(x);
  const OlsFit global = ols_fit(x, y);

  GwrFit out;
  std::vector<double> bandwidths(static_cast<std::size_t>(n));
  if (config.adaptive_k) {
    for (Index i = 0; i < n; ++i)
      bandwidths[static_cast<std::size_t>(i)] = kth_neighbor_distance(locations, static_cast<std::size_t>(i), *config.adaptive_k);
  } else {
    double bw;
    if (config.bandwidth) {
      bw = *config.bandwidth;
    } else {
      if (config.candidates.empty()) config.candidates = default_candidates(locations);
      std::size_t best = 0;
      for (std::size_t c = 0; c < config.candidates.size(); ++c) {
        double sse = 0.0;
        for (Index i = 0; i < n; ++i) {
          const auto beta = local_fit(locations, design, y, locations[static_cast<std::size_t>(i)],
                                      config.candidates[c], i);
          const double pred = design.row(i).dot(beta ? *beta : global.coefficients);
          sse += (y(i) - pred) * (y(i) - pred);
        }
        out.candidate_scores.push_back(sse);
        if (sse < out.candidate_scores[best]) best = c;
      }
      bw = config.candidates[best];
    }
    out.bandwidth = bw;
    std::fill(bandwidths.begin(), bandwidths.end(), bw);
  }

  out.coefficients.resize(n, design.cols());
  out.predictions.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double bw = bandwidths[static_cast<std::size_t>(i)];
    std::optional<Vector> beta;
    if (bw > 0) beta = local_fit(locations, design, y, locations[static_cast<std::size_t>(i)], bw, -1);
    if (!beta) {
      out.fallback_regions.push_back(i);
      warn(diag, "LocalRankDeficient: region " + std::to_string(i) + " uses global OLS coefficients");
      beta = global.coefficients;
    }
    out.coefficients.row(i) = beta->transpose();
    out.predictions(i) = design.row(i).dot(*beta);
  }
  const double ss_tot = (y.array() - y.mean()).square().sum();
  out.r2 = ss_tot > 0 ? 1.0 - (y - out.predictions).squaredNorm() / ss_tot : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Vector gwr_predict(const std::vector<Point>& train_locations, const Matrix& x_train, const Vector& y_train,
                   const std::vector<Point>& locations, const Matrix& x, double bandwidth, Diagnostics* diag) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::InvalidConfig, "gwr bandwidth must be positive");
  if (static_cast<Index>(locations.size()) != x.rows() || x.cols() != x_train.cols())
    throw Error(ErrorCode::ShapeMismatch, "gwr_predict: inputs not aligned");
  const Matrix design = linalg::with_intercept(x_train);
  const OlsFit global = ols_fit(x_train, y_train);
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    auto beta = local_fit(train_locations, design, y_train, locations[static_cast<std::size_t>(i)], bandwidth, -1);
    if (!beta) {
      warn(diag, "LocalRankDeficient: prediction point " + std::to_string(i) + " uses global OLS coefficients");
      beta = global.coefficients;
    }
    out(i) = beta->coeff(0) + x.row(i).dot(beta->tail(x.cols()));
  }
  return out;
}

Vector import_external_predictions(const std::filesystem::path& path, const RegionGraph& graph) {
  const csv::Table t = csv::read(path);
  const std::size_t id_col = t.require("id", path);
  const std::size_t y_col = t.require("yhat", path);
  Vector out = Vector::Constant(static_cast<Index>(graph.size()), std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(graph.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto idx = graph.index_of(t.rows[r][id_col]);
    if (!idx) continue;
    const auto v = csv::parse_number(t.rows[r][y_col], false);
    if (!v) throw Error(ErrorCode::NonNumericCell, path.string() + " row " + std::to_string(r + 2) + ": yhat '" +
                                                       t.rows[r][y_col] + "' is not numeric");
    if (seen[static_cast<std::size_t>(*idx)])
      throw Error(ErrorCode::DuplicateRegionId, path.string() + ": region '" + t.rows[r][id_col] + "' repeated");
    seen[static_cast<std::size_t>(*idx)] = true;
    out(*idx) = *v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw Error(ErrorCode::MissingRegion, path.string() + " has no prediction for region '" +
                                                           graph.region(static_cast<Index>(i)).id + "'");
  return out;
}

}  // namespace geohealth::baselines
