#pragma once

#include <optional>

#include "geohealth/types.hpp"

namespace geohealth::linalg {

/// Principal components of a column-centred data matrix, descending variance.
struct Pca {
  Vector mean;       ///< column means removed before projection
  Vector variances;  ///< eigenvalues of the sample covariance (n-1 denominator)
  Vector ratios;     ///< variances / total variance
  Matrix loadings;   ///< dim x dim, column k is component k
  Matrix scores;     ///< n x dim projections of the centred rows
};

/// Full PCA via covariance eigendecomposition. Every component is flipped so
/// its largest-magnitude loading is positive.
Pca pca(const Matrix& data);

/// Flips `v` so that its largest-magnitude entry (first on ties) is positive.
void fix_sign(Eigen::Ref<Vector> v);

/// Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// [1 | X]
Matrix with_intercept(const Matrix& x);

struct LeastSquares {
  Vector coefficients;
  Vector fitted;
  double ss_res = 0.0;
  double ss_tot = 0.0;  ///< about the mean of y
  Index rank = 0;
};

/// Column-pivoted QR least squares. `rank` reports the numerical rank; the
/// caller decides whether rank deficiency is fatal.
LeastSquares least_squares(const Matrix& design, const Vector& y);

/// Weighted variant: minimises sum_i w_i (y_i - x_i b)^2, w_i >= 0.
LeastSquares weighted_least_squares(const Matrix& design, const Vector& y, const Vector& weights);

}  // namespace geohealth::linalg
