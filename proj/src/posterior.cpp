#include "calib/posterior.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace calib {

namespace {
std::atomic<long> g_clamp_count{0};
}

long variance_clamp_count() { return g_clamp_count.load(); }

ObservationModel ObservationModel::make(Vector y, Matrix sigma, double prior_density) {
  ObservationModel obs;
  obs.y = std::move(y);
  obs.sigma = SpdMatrix(std::move(sigma));
  obs.prior.density = prior_density;
  obs.log_det_sigma = obs.sigma.log_det();
  const Matrix& m = obs.sigma.matrix();
  obs.sigma_is_diagonal =
      (m - Matrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  obs.sigma_diag = m.diagonal();
  return obs;
}

ObservationModel ObservationModel::make_diag(Vector y, Vector sigma_diag,
                                             double prior_density) {
  return make(std::move(y), Matrix(sigma_diag.asDiagonal()), prior_density);
}

double log_inflated_likelihood(const ObservationModel& obs, const Vector& mean,
                               const Vector& extra_diag, double scale) {
  if (obs.sigma_is_diagonal) {
    const Vector total = scale * obs.sigma_diag + extra_diag;
    return mvn_logpdf_diag(obs.y, mean, total);
  }
  Matrix cov = scale * obs.sigma.matrix();
  cov.diagonal() += extra_diag;
  return mvn_logpdf(obs.y, mean, SpdMatrix(std::move(cov)));
}

double true_unnormalized_posterior(const Vector& eta, const ObservationModel& obs,
                                   const Vector& theta) {
  const double logp = obs.prior.log_density(theta);
  if (!std::isfinite(logp)) return 0.0;
  return std::exp(mvn_logpdf(obs.y, eta, obs.sigma) + logp);
}

double posterior_mean_from(const ObservationModel& obs, const Vector& mean,
                           const Vector& var, double log_prior) {
  if (!std::isfinite(log_prior)) return 0.0;
  return std::exp(log_inflated_likelihood(obs, mean, var, 1.0) + log_prior);
}

double posterior_variance_from(const ObservationModel& obs, const Vector& mean,
                               const Vector& var, double log_prior) {
  if (!std::isfinite(log_prior)) return 0.0;
  const double d = static_cast<double>(obs.y.size());
  const double log_first = log_inflated_likelihood(obs, mean, var, 0.5) -
                           d * std::log(2.0) - 0.5 * d * std::log(M_PI) -
                           0.5 * obs.log_det_sigma;
  const double log_second = 2.0 * log_inflated_likelihood(obs, mean, var, 1.0);
  // difference of two near-equal positive terms, kept in log space
  const double diff = log_second - log_first;
  if (diff >= 0.0) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return std::exp(log_first + 2.0 * log_prior) * (-std::expm1(diff));
}

double posterior_mean(const HetGpModel& em, const ObservationModel& obs,
                      const Vector& theta) {
  const double logp = obs.prior.log_density(theta);
  if (!std::isfinite(logp)) return 0.0;
  Vector mean(em.output_dim()), var(em.output_dim());
  em.predict_into(theta, mean, var);
  return posterior_mean_from(obs, mean, var, logp);
}

double posterior_variance(const HetGpModel& em, const ObservationModel& obs,
                          const Vector& theta) {
  const double logp = obs.prior.log_density(theta);
  if (!std::isfinite(logp)) return 0.0;
  Vector mean(em.output_dim()), var(em.output_dim());
  em.predict_into(theta, mean, var);
  return posterior_variance_from(obs, mean, var, logp);
}

double integrated_posterior_variance(const HetGpModel& em, const ObservationModel& obs,
                                     const Matrix& ref) {
  if (ref.rows() < 1) throw std::invalid_argument("integrated_posterior_variance: empty ref");
  std::vector<double> values(ref.rows());
  Vector mean(em.output_dim()), var(em.output_dim());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const Vector theta = ref.row(i).transpose();
    const double logp = obs.prior.log_density(theta);
    if (!std::isfinite(logp)) {
      values[i] = 0.0;
      continue;
    }
    em.predict_into(theta, mean, var);
    values[i] = posterior_variance_from(obs, mean, var, logp);
  }
  return pairwise_sum(values) / static_cast<double>(ref.rows());
}

PosteriorField evaluate_posterior_field(const HetGpModel& em, const ObservationModel& obs,
                                        const Matrix& ref) {
  PosteriorField field;
  field.thetas = ref;
  field.mean.resize(ref.rows());
  field.variance.resize(ref.rows());
  Vector mean(em.output_dim()), var(em.output_dim());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const Vector theta = ref.row(i).transpose();
    const double logp = obs.prior.log_density(theta);
    if (!std::isfinite(logp)) {
      field.mean[i] = 0.0;
      field.variance[i] = 0.0;
      continue;
    }
    em.predict_into(theta, mean, var);
    field.mean[i] = posterior_mean_from(obs, mean, var, logp);
    field.variance[i] = posterior_variance_from(obs, mean, var, logp);
  }
  return field;
}

void PosteriorField::save(std::ostream& os) const {
  os << "# columns: theta[p] mean variance\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < thetas.rows(); ++i) {
    for (Eigen::Index l = 0; l < thetas.cols(); ++l) os << thetas(i, l) << ' ';
    os << mean[i] << ' ' << variance[i] << '\n';
  }
}

}  // namespace calib
