#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

namespace calib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a matrix cannot be factored even after the jitter ladder.
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric positive definite matrix with a cached Cholesky factor.
///
/// Factorization retries with diagonal jitter starting at 1e-8 * mean(diag)
/// and escalating tenfold up to 1e-4 * mean(diag). Averaged-replication
/// covariances get close to singular once replicate counts are large, so the
/// ladder is part of the contract rather than a debugging aid.
class SpdMatrix {
public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m);

  int size() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }
  double applied_jitter() const { return jitter_; }

  double log_det() const;
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// x^T A^{-1} x
  double quad_form(const Vector& x) const;

private:
  Matrix mat_;
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// Solves A X = B. Residual contract: ||A X - B|| / ||B|| <= 1e-8.
Matrix spd_solve(const SpdMatrix& a, const Matrix& b);

/// Log density of MVN(mean, cov) at x.
double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov);

/// Log density when the covariance diagonal is already known: cov = diag(v).
double mvn_logpdf_diag(const Vector& x, const Vector& mean, const Vector& var);

/// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b);

/// Sums v in a fixed pairwise order so parallel producers cannot perturb the
/// result.
double pairwise_sum(std::span<const double> v);

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

}  // namespace calib
