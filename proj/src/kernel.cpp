#include "calib/kernel.hpp"

#include <cmath>

namespace calib {

void Lengthscales::validate() const {
  if (rho.size() < 1) throw std::invalid_argument("Lengthscales: empty");
  for (Eigen::Index l = 0; l < rho.size(); ++l)
    if (!(rho[l] > 0.0) || !std::isfinite(rho[l]))
      throw std::invalid_argument("Lengthscales: entries must be positive and finite");
}

double gaussian_correlation(const Vector& t1, const Vector& t2,
                            const Lengthscales& rho) {
  if (t1.size() != t2.size() || t1.size() != rho.rho.size())
    throw std::invalid_argument("gaussian_correlation: dimension mismatch");
  double expo = 0.0;
  for (Eigen::Index l = 0; l < t1.size(); ++l) {
    const double d = t1[l] - t2[l];
    expo += d * d / (2.0 * rho.rho[l]);
  }
  return std::exp(-expo);
}

Matrix correlation_matrix(const Matrix& X, const Lengthscales& rho) {
  const Eigen::Index n = X.rows();
  Matrix C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    C(i, i) = 1.0;
    for (Eigen::Index k = i + 1; k < n; ++k) {
      double expo = 0.0;
      for (Eigen::Index l = 0; l < X.cols(); ++l) {
        const double d = X(i, l) - X(k, l);
        expo += d * d / (2.0 * rho.rho[l]);
      }
      C(i, k) = C(k, i) = std::exp(-expo);
    }
  }
  return C;
}

Vector correlation_vector(const Matrix& X, const Vector& t,
                          const Lengthscales& rho) {
  const Eigen::Index n = X.rows();
  Vector c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double expo = 0.0;
    for (Eigen::Index l = 0; l < X.cols(); ++l) {
      const double d = X(i, l) - t[l];
      expo += d * d / (2.0 * rho.rho[l]);
    }
    c[i] = std::exp(-expo);
  }
  return c;
}

Matrix cross_correlation(const Matrix& X, const Matrix& Y,
                         const Lengthscales& rho) {
  Matrix C(X.rows(), Y.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index k = 0; k < Y.rows(); ++k) {
      double expo = 0.0;
      for (Eigen::Index l = 0; l < X.cols(); ++l) {
        const double d = X(i, l) - Y(k, l);
        expo += d * d / (2.0 * rho.rho[l]);
      }
      C(i, k) = std::exp(-expo);
    }
  return C;
}

Matrix correlation_matrix_drho(const Matrix& X, const Lengthscales& rho,
                               const Matrix& C, int l) {
  const Eigen::Index n = X.rows();
  const double r2 = rho.rho[l] * rho.rho[l];
  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double d = X(i, l) - X(k, l);
      D(i, k) = D(k, i) = C(i, k) * d * d / (2.0 * r2);
    }
  }
  return D;
}

}  // namespace calib
