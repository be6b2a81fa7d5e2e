#include "calib/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calib/parallel.hpp"

namespace calib {

namespace {

constexpr double kPhiMargin = 1.0 - 1e-12;

// cov^{-1} pieces for cov = scale * Sigma + diag(extra)
struct GaussSolve {
  double logpdf;
  Vector inv_diag;
  Vector inv_h;
};

GaussSolve gauss_solve(const ObservationModel& obs, const Vector& mean,
                       const Vector& extra, double scale) {
  GaussSolve out;
  const Vector h = obs.y - mean;
  if (obs.sigma_is_diagonal) {
    const Vector total = scale * obs.sigma_diag + extra;
    out.logpdf = mvn_logpdf_diag(obs.y, mean, total);
    out.inv_diag = total.cwiseInverse();
    out.inv_h = h.cwiseQuotient(total);
    return out;
  }
  Matrix cov = scale * obs.sigma.matrix();
  cov.diagonal() += extra;
  SpdMatrix spd(std::move(cov));
  out.logpdf = mvn_logpdf(obs.y, mean, spd);
  out.inv_diag = spd.solve(Matrix(Matrix::Identity(mean.size(), mean.size()))).diagonal();
  out.inv_h = spd.solve(h);
  return out;
}

// log of the constant 2^d pi^{d/2} factor
double log_two_pi_half(int d) {
  return d * std::log(2.0) + 0.5 * d * std::log(M_PI);
}

double intrinsic_at_design(const CoordinateModel& cm, int i) {
  return cm.tau * std::exp(cm.log_lambda[i]) * cm.out_sd * cm.out_sd;
}

struct RefCache {
  Vector logp;          // log prior, -inf outside the box
  Matrix mean;          // m x d
  Matrix svar;          // m x d emulator variances
  std::vector<Matrix> u;  // per coordinate: n x m solves (C + Lambda A^{-1})^{-1} Cref
  double mean_term1 = 0.0;  // mean over ref of p^2 * first variance term
  double sum_svar = 0.0;
};

RefCache build_ref_cache(const HetGpModel& model, const ObservationModel* obs,
                         const Matrix& ref, bool with_solves) {
  const int m = static_cast<int>(ref.rows());
  const int d = model.output_dim();
  RefCache cache;
  cache.logp.resize(m);
  cache.mean.resize(m, d);
  cache.svar.resize(m, d);
  std::vector<double> term1(m, 0.0);
  parallel_for(m, [&](int k) {
    const Vector theta = ref.row(k).transpose();
    Vector mu(d), sv(d);
    model.predict_into(theta, mu, sv);
    cache.mean.row(k) = mu.transpose();
    cache.svar.row(k) = sv.transpose();
    cache.logp[k] = obs ? obs->prior.log_density(theta) : 0.0;
    if (obs && std::isfinite(cache.logp[k])) {
      const double lf = log_inflated_likelihood(*obs, mu, sv, 0.5) -
                        log_two_pi_half(d) - 0.5 * obs->log_det_sigma;
      term1[k] = std::exp(lf + 2.0 * cache.logp[k]);
    }
  });
  cache.mean_term1 = pairwise_sum(term1) / m;
  cache.sum_svar = cache.svar.sum();
  if (with_solves) {
    cache.u.resize(d);
    for (int j = 0; j < d; ++j) {
      const CoordinateModel& cm = model.coord(j);
      const Matrix cref = cross_correlation(model.design(), ref, Lengthscales{cm.hp.rho});
      Matrix y = cm.chol.triangularView<Eigen::Lower>().solve(cref);
      cache.u[j] = cm.chol.transpose().triangularView<Eigen::Upper>().solve(y);
    }
  }
  return cache;
}

}  // namespace

Vector ivar_replication_sensitivities(const HetGpModel& model, const ObservationModel& obs,
                                      const Matrix& ref) {
  const int n = model.n_design();
  const int d = model.output_dim();
  const int m = static_cast<int>(ref.rows());
  const RefCache cache = build_ref_cache(model, &obs, ref, true);

  Matrix contrib = Matrix::Zero(m, n);
  parallel_for(m, [&](int k) {
    if (!std::isfinite(cache.logp[k])) return;
    const Vector mu = cache.mean.row(k).transpose();
    const Vector sv = cache.svar.row(k).transpose();
    const GaussSolve half = gauss_solve(obs, mu, sv, 0.5);
    const GaussSolve full = gauss_solve(obs, mu, sv, 1.0);
    const double coef_f = std::exp(half.logpdf - log_two_pi_half(d) -
                                   0.5 * obs.log_det_sigma + 2.0 * cache.logp[k]);
    const double coef_g = std::exp(2.0 * full.logpdf + 2.0 * cache.logp[k]);
    for (int i = 0; i < n; ++i) {
      double df = 0.0, dg = 0.0;
      for (int j = 0; j < d; ++j) {
        const double u = cache.u[j](i, k);
        const double reduction = intrinsic_at_design(model.coord(j), i) * u * u;
        df += reduction * (half.inv_diag[j] - half.inv_h[j] * half.inv_h[j]);
        dg += reduction * (full.inv_diag[j] - full.inv_h[j] * full.inv_h[j]);
      }
      // a_i^2 * d/dDelta_i of the pointwise posterior variance, negated
      contrib(k, i) = -(0.5 * coef_f * df - coef_g * dg);
    }
  });

  Vector out(n);
  for (int i = 0; i < n; ++i) {
    const Vector col = contrib.col(i);
    out[i] = pairwise_sum(std::span<const double>(col.data(), m)) / m;
  }
  return out;
}

Vector ivar_delta_gradient(const HetGpModel& model, const ObservationModel& obs,
                           const Matrix& ref) {
  Vector grad = -ivar_replication_sensitivities(model, obs, ref);
  for (int i = 0; i < model.n_design(); ++i) {
    const double a = static_cast<double>(model.reps()[i]);
    grad[i] /= a * a;
  }
  return grad;
}

Vector ivar_allocation_weights(const HetGpModel& model, const ObservationModel& obs,
                               const Matrix& ref) {
  return ivar_replication_sensitivities(model, obs, ref).cwiseMax(0.0).cwiseSqrt();
}

Vector imse_allocation_weights(const HetGpModel& model, const Matrix& ref) {
  const int n = model.n_design();
  const int d = model.output_dim();
  const int m = static_cast<int>(ref.rows());
  const RefCache cache = build_ref_cache(model, nullptr, ref, true);
  Vector acc = Vector::Zero(n);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        const double u = cache.u[j](i, k);
        s += intrinsic_at_design(model.coord(j), i) * u * u;
      }
      acc[i] += s;
    }
  return (acc / m).cwiseMax(0.0).cwiseSqrt();
}

ReplicationAllocation replication_from_weights(const std::vector<int>& reps,
                                               const Vector& weights, int b) {
  const int n = static_cast<int>(reps.size());
  if (weights.size() != n) throw std::invalid_argument("replication_from_weights: sizes");
  if (b < 1) throw std::invalid_argument("replication_from_weights: b >= 1");

  ReplicationAllocation out;
  out.weights = weights;
  Vector w = weights.cwiseMax(0.0);
  if (w.sum() <= 0.0) w = Vector::Ones(n);

  long current = 0;
  for (int a : reps) current += a;
  const double total = static_cast<double>(current + b);

  out.upper_bounds = total * w / w.sum();
  for (int i = 0; i < n; ++i)
    if (out.upper_bounds[i] < reps[i]) out.upper_bounds[i] = 0.0;

  Vector share_weights = out.upper_bounds;
  if (share_weights.sum() <= 0.0) {
    out.degenerate_fallback = true;
    share_weights = w;
  }

  const Vector shares = b * share_weights / share_weights.sum();
  out.delta.assign(n, 0);
  std::vector<std::pair<double, int>> fractional;
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    out.delta[i] = static_cast<int>(std::floor(shares[i]));
    assigned += out.delta[i];
    if (share_weights[i] > 0.0) fractional.emplace_back(shares[i] - out.delta[i], i);
  }
  std::sort(fractional.begin(), fractional.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t r = 0; assigned < b && r < fractional.size(); ++r) {
    ++out.delta[fractional[r].second];
    ++assigned;
  }
  if (assigned != b) throw std::logic_error("replication_from_weights: rounding shortfall");
  return out;
}

ReplicationAllocation ivar_replication_batch(const HetGpModel& model,
                                             const ObservationModel& obs,
                                             const Matrix& ref, int b) {
  return replication_from_weights(model.reps(), ivar_allocation_weights(model, obs, ref), b);
}

ReplicationAllocation imse_replication_batch(const HetGpModel& model, const Matrix& ref,
                                             int b) {
  return replication_from_weights(model.reps(), imse_allocation_weights(model, ref), b);
}

namespace {

// Candidate-dependent part of the expected posterior variance after adding
// a_new replicates at cand: mean over ref of p^2 * second term. The full
// criterion is cache.mean_term1 minus this value. With obs == nullptr only
// the phi total is accumulated (the emulator-variance criterion needs no
// posterior terms).
double exploration_reduction_term(const HetGpModel& model, const ObservationModel* obs,
                                  const RefCache& cache, const Matrix& ref,
                                  const Vector& cand, int a_new, double* phi_total) {
  const int d = model.output_dim();
  const int m = static_cast<int>(ref.rows());

  Vector cand_mean(d), cand_var(d);
  model.predict_into(cand, cand_mean, cand_var);
  const Vector cand_r = model.intrinsic_at(cand);

  // cov_{j}(theta_k, cand) for all reference points
  Matrix cov(m, d);
  for (int j = 0; j < d; ++j) {
    const CoordinateModel& cm = model.coord(j);
    const Vector c_cand = correlation_vector(model.design(), cand, Lengthscales{cm.hp.rho});
    const Vector q = cache.u[j].transpose() * c_cand;
    const Vector cc = correlation_vector(ref, cand, Lengthscales{cm.hp.rho});
    const double scale = cm.tau * cm.out_sd * cm.out_sd;
    cov.col(j) = scale * (cc - q);
  }

  Vector denom(d);
  for (int j = 0; j < d; ++j)
    denom[j] = std::max(cand_var[j] + cand_r[j] / a_new, 1e-300);

  double phi_sum = 0.0;
  std::vector<double> vals(m, 0.0);
  Vector phi(d), half_cov(d), resid(d);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < d; ++j) {
      const double c = cov(k, j);
      phi[j] = std::min(c * c / denom[j], cache.svar(k, j) * kPhiMargin);
      half_cov[j] = 0.5 * (cache.svar(k, j) + phi[j]);
      resid[j] = cache.svar(k, j) - phi[j];
    }
    phi_sum += phi.sum();
    if (!obs || !std::isfinite(cache.logp[k])) continue;
    const Vector mu = cache.mean.row(k).transpose();
    double log_resid_det;
    double log_num;
    if (obs->sigma_is_diagonal) {
      log_num = mvn_logpdf_diag(obs->y, mu, 0.5 * obs->sigma_diag + half_cov);
      log_resid_det = (obs->sigma_diag + resid).array().log().sum();
    } else {
      log_num = log_inflated_likelihood(*obs, mu, half_cov, 0.5);
      Matrix res_cov = obs->sigma.matrix();
      res_cov.diagonal() += resid;
      log_resid_det = SpdMatrix(std::move(res_cov)).log_det();
    }
    vals[k] = std::exp(log_num - log_two_pi_half(d) - 0.5 * log_resid_det +
                       2.0 * cache.logp[k]);
  }
  if (phi_total) *phi_total = phi_sum;
  return pairwise_sum(vals) / m;
}

}  // namespace

double ivar_exploration_score(const HetGpModel& model, const ObservationModel& obs,
                              const Vector& cand, int a_new, const Matrix& ref) {
  const RefCache cache = build_ref_cache(model, &obs, ref, true);
  return -exploration_reduction_term(model, &obs, cache, ref, cand, a_new, nullptr);
}

double ivar_exploration_criterion(const HetGpModel& model, const ObservationModel& obs,
                                  const Vector& cand, int a_new, const Matrix& ref) {
  const RefCache cache = build_ref_cache(model, &obs, ref, true);
  return cache.mean_term1 -
         exploration_reduction_term(model, &obs, cache, ref, cand, a_new, nullptr);
}

double imse_exploration_score(const HetGpModel& model, const Vector& cand, int a_new,
                              const Matrix& ref) {
  const RefCache cache = build_ref_cache(model, nullptr, ref, true);
  double phi_total = 0.0;
  exploration_reduction_term(model, nullptr, cache, ref, cand, a_new, &phi_total);
  return cache.sum_svar - phi_total;
}

double var_exploration_score(const HetGpModel& model, const ObservationModel& obs,
                             const Vector& cand) {
  return -posterior_variance(model, obs, cand);
}

ExplorationBatch build_exploration_batch(const HetGpModel& model, const ObservationModel& obs,
                                         const Matrix& ref, ExplorationCriterion criterion,
                                         int b_breve, int a_breve, int n_candidates,
                                         RngStream& rng) {
  if (b_breve < 1 || a_breve < 1 || n_candidates < 1)
    throw std::invalid_argument("build_exploration_batch: bad sizes");
  const int p = model.param_dim();
  ExplorationBatch batch;
  batch.new_params.resize(b_breve, p);
  batch.reps_each = a_breve;
  batch.scores.resize(b_breve);

  HetGpModel current = model;
  for (int pick = 0; pick < b_breve; ++pick) {
    Matrix cands(n_candidates, p);
    for (int c = 0; c < n_candidates; ++c)
      for (int l = 0; l < p; ++l) cands(c, l) = rng.uniform();

    std::vector<double> scores(n_candidates);
    if (criterion == ExplorationCriterion::var) {
      parallel_for(n_candidates, [&](int c) {
        scores[c] = var_exploration_score(current, obs, cands.row(c).transpose());
      });
    } else {
      const bool want_ivar = criterion == ExplorationCriterion::ivar;
      const RefCache cache = build_ref_cache(current, want_ivar ? &obs : nullptr, ref, true);
      parallel_for(n_candidates, [&](int c) {
        const Vector cand = cands.row(c).transpose();
        double phi_total = 0.0;
        const double reduction = exploration_reduction_term(
            current, want_ivar ? &obs : nullptr, cache, ref, cand, a_breve, &phi_total);
        scores[c] = want_ivar ? -reduction : cache.sum_svar - phi_total;
      });
    }
    int best = -1;
    for (int c = 0; c < n_candidates; ++c) {
      if (current.find_design_point(cands.row(c).transpose()) >= 0) continue;
      if (best < 0 || scores[c] < scores[best]) best = c;
    }
    if (best < 0) throw std::runtime_error("build_exploration_batch: no usable candidate");
    batch.new_params.row(pick) = cands.row(best);
    batch.scores[pick] = scores[best];
    current = current.fantasy_update(cands.row(best).transpose(), a_breve);
  }
  return batch;
}

HetGpModel apply_exploration(const HetGpModel& model, const ExplorationBatch& batch) {
  HetGpModel out = model;
  for (Eigen::Index i = 0; i < batch.new_params.rows(); ++i)
    out = out.fantasy_update(batch.new_params.row(i).transpose(), batch.reps_each);
  return out;
}

AcquisitionBatch select_strategy(const HetGpModel& model, const ObservationModel& obs,
                                 const Matrix& ref, ReplicationAllocation replication,
                                 ExplorationBatch exploration) {
  AcquisitionBatch out;
  const HetGpModel rep_model = model.with_added_replicates(replication.delta);
  out.variance_replication = integrated_posterior_variance(rep_model, obs, ref);
  const HetGpModel exp_model = apply_exploration(model, exploration);
  out.variance_exploration = integrated_posterior_variance(exp_model, obs, ref);
  out.strategy = out.variance_exploration < out.variance_replication
                     ? AcquisitionBatch::Strategy::exploration
                     : AcquisitionBatch::Strategy::replication;
  out.replication = std::move(replication);
  out.exploration = std::move(exploration);
  return out;
}

}  // namespace calib
