#pragma once

#include "calib/linalg.hpp"

namespace calib {

/// Per-dimension squared-distance scales of the separable Gaussian kernel.
struct Lengthscales {
  Vector rho;

  explicit Lengthscales(Vector r) : rho(std::move(r)) { validate(); }
  Lengthscales() = default;

  int dim() const { return static_cast<int>(rho.size()); }
  void validate() const;
};

/// prod_l exp(-(t1_l - t2_l)^2 / (2 rho_l)); in (0, 1], equal to 1 iff t1 == t2.
double gaussian_correlation(const Vector& t1, const Vector& t2,
                            const Lengthscales& rho);

/// Correlation matrix of the rows of X (n x p).
Matrix correlation_matrix(const Matrix& X, const Lengthscales& rho);

/// Cross correlations c(X_i, t), one per row of X.
Vector correlation_vector(const Matrix& X, const Vector& t,
                          const Lengthscales& rho);

/// Cross correlation matrix between rows of X (n x p) and rows of Y (m x p).
Matrix cross_correlation(const Matrix& X, const Matrix& Y,
                         const Lengthscales& rho);

/// Elementwise derivative of correlation_matrix wrt rho_l:
/// dC_ij/drho_l = C_ij * (X_il - X_jl)^2 / (2 rho_l^2).
Matrix correlation_matrix_drho(const Matrix& X, const Lengthscales& rho,
                               const Matrix& C, int l);

}  // namespace calib
