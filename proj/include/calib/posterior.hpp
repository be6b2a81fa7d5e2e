#pragma once

#include "calib/hetgp.hpp"
#include "calib/linalg.hpp"

#include <atomic>
#include <iosfwd>

namespace calib {

/// Uniform prior on the unit cube with a constant density value.
struct UniformBoxPrior {
  double density = 1.0;

  double log_density(const Vector& theta) const {
    for (Eigen::Index l = 0; l < theta.size(); ++l)
      if (theta[l] < 0.0 || theta[l] > 1.0)
        return -std::numeric_limits<double>::infinity();
    return std::log(density);
  }
};

/// Observed data, residual covariance, and the parameter prior.
struct ObservationModel {
  Vector y;
  SpdMatrix sigma;
  UniformBoxPrior prior;

  bool sigma_is_diagonal = false;
  Vector sigma_diag;
  double log_det_sigma = 0.0;

  static ObservationModel make(Vector y, Matrix sigma, double prior_density = 1.0);
  static ObservationModel make_diag(Vector y, Vector sigma_diag, double prior_density = 1.0);
};

/// log f_N(y; mean, scale * Sigma + diag(extra)).
double log_inflated_likelihood(const ObservationModel& obs, const Vector& mean,
                               const Vector& extra_diag, double scale);

/// Unnormalized posterior at theta given the expected simulation output eta.
double true_unnormalized_posterior(const Vector& eta, const ObservationModel& obs,
                                   const Vector& theta);

/// Posterior mean of the unnormalized posterior under the emulator.
double posterior_mean(const HetGpModel& em, const ObservationModel& obs,
                      const Vector& theta);

/// Posterior variance of the unnormalized posterior; clamped at zero when
/// cancellation drives the computed difference negative.
double posterior_variance(const HetGpModel& em, const ObservationModel& obs,
                          const Vector& theta);

/// Same quantities from an already-computed prediction (hot paths).
double posterior_mean_from(const ObservationModel& obs, const Vector& mean,
                           const Vector& var, double log_prior);
double posterior_variance_from(const ObservationModel& obs, const Vector& mean,
                               const Vector& var, double log_prior);

/// Mean of posterior_variance over the rows of ref (pairwise reduction).
double integrated_posterior_variance(const HetGpModel& em, const ObservationModel& obs,
                                     const Matrix& ref);

/// Count of negative-variance clamps since process start (diagnostic).
long variance_clamp_count();

struct PosteriorField {
  Matrix thetas;
  Vector mean;
  Vector variance;

  void save(std::ostream& os) const;
};

PosteriorField evaluate_posterior_field(const HetGpModel& em, const ObservationModel& obs,
                                        const Matrix& ref);

}  // namespace calib
