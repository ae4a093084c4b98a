#include "geohealth/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geohealth/error.hpp"

namespace geohealth::linalg {

void fix_sign(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best)) * (1.0 + 1e-12)) best = i;
  if (v(best) < 0) v = -v;
}

Pca pca(const Matrix& data) {
  const Index n = data.rows();
  const Index dim = data.cols();
  if (n < 2) throw Error(ErrorCode::TooFewRows, "PCA needs at least 2 rows, got " + std::to_string(n));

  Pca out;
  out.mean = data.colwise().mean().transpose();
  const Matrix centred = data.rowwise() - out.mean.transpose();
  const Matrix cov = (centred.transpose() * centred) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "covariance eigensolver failed");

  // Eigen returns ascending eigenvalues; reverse to descending.
  out.variances.resize(dim);
  out.loadings.resize(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    out.variances(k) = std::max(0.0, solver.eigenvalues()(dim - 1 - k));
    out.loadings.col(k) = solver.eigenvectors().col(dim - 1 - k);
    fix_sign(out.loadings.col(k));
  }
  const double total = out.variances.sum();
  out.ratios = total > 0 ? Vector(out.variances / total) : Vector::Zero(dim);
  out.scores = centred * out.loadings;
  return out;
}

std::optional<double> pearson(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "pearson: length mismatch");
  if (a.size() < 2) return std::nullopt;
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double saa = da.squaredNorm();
  const double sbb = db.squaredNorm();
  // relative test so that values like (c, c, c) with round-off still read as constant
  const double scale_a = a.cwiseAbs().maxCoeff();
  const double scale_b = b.cwiseAbs().maxCoeff();
  const double tiny = 1e-28 * static_cast<double>(a.size());
  if (saa <= tiny * std::max(1.0, scale_a * scale_a) || sbb <= tiny * std::max(1.0, scale_b * scale_b))
    return std::nullopt;
  const double r = da.dot(db) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

Matrix with_intercept(const Matrix& x) {
  Matrix d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

LeastSquares least_squares(const Matrix& design, const Vector& y) {
  if (design.rows() != y.size()) throw Error(ErrorCode::ShapeMismatch, "least_squares: row mismatch");
  LeastSquares out;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  out.rank = qr.rank();
  out.coefficients = qr.solve(y);
  out.fitted = design * out.coefficients;
  out.ss_res = (y - out.fitted).squaredNorm();
  out.ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  return out;
}

LeastSquares weighted_least_squares(const Matrix& design, const Vector& y, const Vector& weights) {
  if (design.rows() != y.size() || weights.size() != y.size())
    throw Error(ErrorCode::ShapeMismatch, "weighted_least_squares: row mismatch");
  const Vector sw = weights.cwiseMax(0.0).cwiseSqrt();
  const Matrix wd = sw.asDiagonal() * design;
  const Vector wy = sw.cwiseProduct(y);
  LeastSquares out;
  Eigen::ColPivHouseholderQR<Matrix> qr(wd);
  qr.setThreshold(1e-10);
  out.rank = qr.rank();
  out.coefficients = qr.solve(wy);
  out.fitted = design * out.coefficients;
  const double wsum = weights.sum();
  const double ybar = wsum > 0 ? weights.dot(y) / wsum : 0.0;
  out.ss_res = (weights.array() * (y - out.fitted).array().square()).sum();
  out.ss_tot = (weights.array() * (y.array() - ybar).square()).sum();
  return out;
}

}  // namespace geohealth::linalg
