#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "geohealth/error.hpp"
#include "geohealth/geo_graph.hpp"
#include "geohealth/types.hpp"

namespace geohealth::baselines {

/// Row-standardised adjacency: W_ij = A_ij / deg(i); isolated rows are zero.
struct SpatialWeights {
  Matrix w;

  Index size() const noexcept { return w.rows(); }
};

SpatialWeights row_standardized_weights(const RegionGraph& graph);

struct OlsFit {
  Vector coefficients;  ///< intercept first
  double r2 = 0.0;
  Vector fitted;

  Vector predict(const Matrix& x) const;
};

/// Least squares with intercept. RankDeficient when N <= F or [1|X] loses rank.
OlsFit ols_fit(const Matrix& x, const Vector& y);

struct SlmFit {
  double rho = 0.0;
  Vector coefficients;  ///< intercept first
  double r2 = 0.0;      ///< squared correlation of fitted and observed
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
  double rho_lower = 0.0;  ///< open search interval
  double rho_upper = 0.0;
  Vector fitted;           ///< rho W y + X beta
  Vector eigenvalues;      ///< of W, ascending
};

/// Concentrated log-likelihood of y = rho W y + X b + e at `rho`, given the
/// OLS residuals e0 of y and eL of Wy on [1|X] and the eigenvalues of W.
double slm_log_likelihood(double rho, const Vector& e0, const Vector& e_lag, const Vector& eigenvalues);

/// Profile maximum likelihood: a 200-cell grid over the open interval
/// (1/lambda_min, 1/lambda_max) then golden-section refinement to 1e-6.
SlmFit slm_fit(const RegionGraph& graph, const Matrix& x, const Vector& y);

/// Reduced-form prediction (I - rho W)^-1 [1|X] beta on `graph`.
Vector slm_predict(const SlmFit& fit, const RegionGraph& graph, const Matrix& x);

struct GwrConfig {
  enum class Kernel { gaussian };
  Kernel kernel = Kernel::gaussian;
  /// Fixed bandwidth; when unset it is selected from `candidates`.
  std::optional<double> bandwidth;
  /// Adaptive bandwidth: per-region distance to the k-th nearest other region.
  std::optional<int> adaptive_k;
  std::vector<double> candidates;

  void validate() const;
};

double gwr_weight(double distance, double bandwidth);

struct GwrFit {
  double bandwidth = 0.0;             ///< chosen fixed bandwidth (0 when adaptive)
  Matrix coefficients;                ///< N x (F + 1), intercept first
  Vector predictions;
  double r2 = 0.0;
  std::vector<Index> fallback_regions;  ///< regions that used global OLS coefficients
  std::vector<double> candidate_scores; ///< leave-one-out SSE per candidate
};

/// Gaussian-kernel geographically weighted regression at every location.
/// Without a fixed bandwidth the candidate with the smallest leave-one-out
/// squared error wins (earlier on ties); with no candidates a geometric
/// ladder between the smallest neighbour distance and the map diagonal is used.
GwrFit gwr_fit_predict(const std::vector<Point>& locations, const Matrix& x, const Vector& y, GwrConfig config,
                       Diagnostics* diag = nullptr);

/// Local fits from the training sample evaluated at new locations.
Vector gwr_predict(const std::vector<Point>& train_locations, const Matrix& x_train, const Vector& y_train,
                   const std::vector<Point>& locations, const Matrix& x, double bandwidth,
                   Diagnostics* diag = nullptr);

std::vector<Point> centroids(const RegionGraph& graph);

/// CSV "id,yhat" aligned to graph order. MissingRegion when a region has no row.
Vector import_external_predictions(const std::filesystem::path& path, const RegionGraph& graph);

}  // namespace geohealth::baselines
