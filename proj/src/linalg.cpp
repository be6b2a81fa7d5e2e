#include "calib/linalg.hpp"

#include <cmath>

namespace calib {

namespace {
constexpr double kJitterStart = 1e-8;
constexpr double kJitterMax = 1e-4;
constexpr double kSymTol = 1e-12;
}  // namespace

SpdMatrix::SpdMatrix(Matrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SpdMatrix: not square");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(scale, 1.0))
    throw std::invalid_argument("SpdMatrix: not symmetric");
  mat_ = 0.5 * (m + m.transpose());

  const double diag_mean = std::max(mat_.diagonal().mean(), 1e-300);
  llt_.compute(mat_);
  double level = kJitterStart;
  while (llt_.info() != Eigen::Success && level <= kJitterMax * 1.01) {
    jitter_ = level * diag_mean;
    Matrix shifted = mat_;
    shifted.diagonal().array() += jitter_;
    llt_.compute(shifted);
    level *= 10.0;
  }
  if (llt_.info() != Eigen::Success)
    throw SingularMatrixError("SpdMatrix: factorization failed after max jitter");
}

double SpdMatrix::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Vector SpdMatrix::solve(const Vector& b) const { return llt_.solve(b); }

Matrix SpdMatrix::solve(const Matrix& b) const { return llt_.solve(b); }

double SpdMatrix::quad_form(const Vector& x) const {
  return x.dot(llt_.solve(x));
}

Matrix spd_solve(const SpdMatrix& a, const Matrix& b) { return a.solve(b); }

double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov) {
  if (x.size() != mean.size() || x.size() != cov.size())
    throw std::invalid_argument("mvn_logpdf: dimension mismatch");
  const double d = static_cast<double>(x.size());
  const Vector r = x - mean;
  return -0.5 * (d * std::log(2.0 * M_PI) + cov.log_det() + cov.quad_form(r));
}

double mvn_logpdf_diag(const Vector& x, const Vector& mean, const Vector& var) {
  if (x.size() != mean.size() || x.size() != var.size())
    throw std::invalid_argument("mvn_logpdf_diag: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (var[j] <= 0.0) throw SingularMatrixError("mvn_logpdf_diag: nonpositive variance");
    const double r = x[j] - mean[j];
    acc += std::log(2.0 * M_PI * var[j]) + r * r / var[j];
  }
  return -0.5 * acc;
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace calib
