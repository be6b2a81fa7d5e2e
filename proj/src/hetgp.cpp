#include "calib/hetgp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "calib/rng.hpp"

namespace calib {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTauGFloor = 1e-8;
constexpr double kTauFloor = 1e-12;
constexpr double kVarianceFloor = 1e-8;  // on standardized sample variances

// Cholesky with the escalating-jitter ladder. Returns the applied jitter or
// -1 when the matrix stays indefinite.
double chol_with_jitter(const Matrix& a, Matrix& lower) {
  const double diag_mean = std::max(a.diagonal().mean(), 1e-300);
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    lower = llt.matrixL();
    return 0.0;
  }
  for (double level = 1e-8; level <= 1.01e-4; level *= 10.0) {
    Matrix shifted = a;
    shifted.diagonal().array() += level * diag_mean;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      return level * diag_mean;
    }
  }
  return -1.0;
}

Vector chol_solve(const Matrix& lower, const Vector& b) {
  Vector y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix chol_solve(const Matrix& lower, const Matrix& b) {
  Matrix y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

double chol_logdet(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

// Minimizes f over a box with projected-gradient L-BFGS and Armijo
// backtracking. Accepted objective values are monotone by construction.
struct BoxLbfgs {
  int max_iterations = 150;
  int history = 8;

  template <typename F>
  bool minimize(F&& f, Vector& x, const Vector& lo, const Vector& hi,
                double& fx, std::vector<double>* trace = nullptr) const {
    const auto clamp = [&](Vector v) {
      return v.cwiseMax(lo).cwiseMin(hi);
    };
    x = clamp(x);
    Vector g(x.size());
    fx = f(x, g);
    if (!std::isfinite(fx)) return false;
    if (trace) trace->push_back(fx);

    std::deque<std::pair<Vector, Vector>> mem;  // (s, y)
    Vector g_new(x.size());
    for (int iter = 0; iter < max_iterations; ++iter) {
      // two-loop recursion
      Vector d = -g;
      std::vector<double> rho_mem, alpha_mem;
      for (auto it = mem.rbegin(); it != mem.rend(); ++it) {
        const double rho = 1.0 / it->second.dot(it->first);
        const double a = rho * it->first.dot(d);
        d -= a * it->second;
        rho_mem.push_back(rho);
        alpha_mem.push_back(a);
      }
      if (!mem.empty()) {
        const auto& [s_last, y_last] = mem.back();
        d *= s_last.dot(y_last) / y_last.dot(y_last);
      }
      {
        std::size_t k = mem.size();
        for (auto it = mem.begin(); it != mem.end(); ++it) {
          --k;
          const double b = rho_mem[k] * it->second.dot(d);
          d += (alpha_mem[k] - b) * it->first;
        }
      }
      if (d.dot(g) >= 0.0) {
        mem.clear();
        d = -g;
      }

      double step = 1.0;
      bool accepted = false;
      Vector x_new;
      double f_new = fx;
      for (int ls = 0; ls < 40; ++ls) {
        x_new = clamp(x + step * d);
        const Vector dx = x_new - x;
        if (dx.cwiseAbs().maxCoeff() == 0.0) break;
        f_new = f(x_new, g_new);
        if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(dx)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        if (mem.empty()) break;
        mem.clear();
        continue;
      }

      const Vector s = x_new - x;
      const Vector y = g_new - g;
      if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
        mem.emplace_back(s, y);
        if (static_cast<int>(mem.size()) > history) mem.pop_front();
      }
      const double f_drop = fx - f_new;
      x = x_new;
      g = g_new;
      fx = f_new;
      if (trace) trace->push_back(fx);

      double pg = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lo = x[i] <= lo[i] && g[i] > 0.0;
        const bool at_hi = x[i] >= hi[i] && g[i] < 0.0;
        if (!at_lo && !at_hi) pg = std::max(pg, std::abs(g[i]));
      }
      if (pg <= 1e-8 * (1.0 + std::abs(fx))) break;
      if (f_drop <= 1e-12 * (1.0 + std::abs(fx))) break;
    }
    return true;
  }
};

struct PackedBounds {
  Vector lo, hi;
};

Vector pack(const CoordinateHyperparams& hp) {
  const int p = static_cast<int>(hp.rho.size());
  const int n = static_cast<int>(hp.latent.size());
  Vector x(2 * p + n + 1);
  x.segment(0, p) = hp.rho.array().log();
  x.segment(p, p) = hp.rho_g.array().log();
  x.segment(2 * p, n) = hp.latent;
  x[2 * p + n] = std::log(hp.nugget_g);
  return x;
}

CoordinateHyperparams unpack(const Vector& x, int p, int n) {
  CoordinateHyperparams hp;
  hp.rho = x.segment(0, p).array().exp();
  hp.rho_g = x.segment(p, p).array().exp();
  hp.latent = x.segment(2 * p, n);
  hp.nugget_g = std::exp(x[2 * p + n]);
  return hp;
}

PackedBounds make_bounds(const FitConfig& cfg, int p, int n) {
  PackedBounds b;
  b.lo.resize(2 * p + n + 1);
  b.hi.resize(2 * p + n + 1);
  b.lo.segment(0, 2 * p).setConstant(std::log(cfg.rho_lo));
  b.hi.segment(0, 2 * p).setConstant(std::log(cfg.rho_hi));
  b.lo.segment(2 * p, n).setConstant(-cfg.latent_bound);
  b.hi.segment(2 * p, n).setConstant(cfg.latent_bound);
  b.lo[2 * p + n] = std::log(cfg.nugget_lo);
  b.hi[2 * p + n] = std::log(cfg.nugget_hi);
  return b;
}

}  // namespace

double het_gp_objective(const Matrix& X, const std::vector<int>& reps,
                        const Vector& zbar_std, const Vector& ss_std, long n_total,
                        const CoordinateHyperparams& hp, Vector* grad) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const double n_tot = static_cast<double>(n_total);

  Vector inv_a(n);
  for (int i = 0; i < n; ++i) inv_a[i] = 1.0 / reps[i];

  const Lengthscales rho{hp.rho};
  const Lengthscales rho_g{hp.rho_g};

  const Matrix Cg = correlation_matrix(X, rho_g);
  Matrix G = Cg;
  G.diagonal() += hp.nugget_g * inv_a;
  Matrix Lg;
  if (chol_with_jitter(G, Lg) < 0.0) return -kInf;

  // constant trend: the latent log-noise field reverts to its own mean
  // level, not to zero
  const double trend = hp.latent.mean();
  const Vector latent_c = hp.latent.array() - trend;
  const Vector w = chol_solve(Lg, latent_c);
  const Vector s = (Cg * w).array() + trend;
  const Vector lambda = s.array().exp();

  const Matrix C = correlation_matrix(X, rho);
  Matrix Ca = C;
  Ca.diagonal() += lambda.cwiseProduct(inv_a);
  Matrix L;
  if (chol_with_jitter(Ca, L) < 0.0) return -kInf;

  const Vector alpha = chol_solve(L, zbar_std);
  const double qf = zbar_std.dot(alpha);
  const double ss_term = (ss_std.array() / lambda.array()).sum();
  const double q_total = qf + ss_term;
  const double tau = std::max(q_total / n_tot, kTauFloor);

  const double tau_g_raw = latent_c.dot(w) / n;
  const bool tau_g_floored = tau_g_raw < kTauGFloor;
  const double tau_g = tau_g_floored ? kTauGFloor : tau_g_raw;

  double obj = 0.0;
  obj -= 0.5 * n_tot * (std::log(2.0 * M_PI) + std::log(tau) + 1.0);
  for (int i = 0; i < n; ++i) obj -= 0.5 * ((reps[i] - 1) * s[i] + std::log(double(reps[i])));
  obj -= 0.5 * chol_logdet(L);
  obj -= 0.5 * n * (std::log(2.0 * M_PI) + std::log(tau_g) + 1.0);
  obj -= 0.5 * chol_logdet(Lg);
  if (!std::isfinite(obj)) return -kInf;
  if (!grad) return obj;

  const Matrix Cinv = chol_solve(L, Matrix(Matrix::Identity(n, n)));
  const Matrix Ginv = chol_solve(Lg, Matrix(Matrix::Identity(n, n)));
  const double q_used = std::max(q_total, kTauFloor * n_tot);

  // derivative of obj wrt the smoothed log-noise s_i
  Vector beta(n);
  for (int i = 0; i < n; ++i) {
    const double dii = lambda[i] * inv_a[i];
    beta[i] = 0.5 * n_tot / q_used * (alpha[i] * alpha[i] * dii + ss_std[i] / lambda[i]) -
              0.5 * (reps[i] - 1) - 0.5 * Cinv(i, i) * dii;
  }

  const Vector cg_beta = Cg * beta;
  const Vector smoothed_beta = chol_solve(Lg, cg_beta);  // W^T beta

  grad->resize(2 * p + n + 1);
  for (int l = 0; l < p; ++l) {
    const Matrix D = correlation_matrix_drho(X, rho, C, l);
    const double dv = 0.5 * n_tot / q_used * alpha.dot(D * alpha) -
                      0.5 * Cinv.cwiseProduct(D).sum();
    (*grad)[l] = dv * hp.rho[l];  // log-space chain
  }
  for (int l = 0; l < p; ++l) {
    const Matrix Dg = correlation_matrix_drho(X, rho_g, Cg, l);
    const Vector dg_w = Dg * w;
    double dv = (beta - smoothed_beta).dot(dg_w);
    if (!tau_g_floored) dv += 0.5 * w.dot(dg_w) / tau_g;
    dv -= 0.5 * Ginv.cwiseProduct(Dg).sum();
    (*grad)[p + l] = dv * hp.rho_g[l];
  }
  {
    // chain through the centering projector and the trend
    Vector glat = smoothed_beta.array() - smoothed_beta.mean() + beta.mean();
    if (!tau_g_floored) glat -= (w.array() - w.mean()).matrix() / tau_g;
    grad->segment(2 * p, n) = glat;
  }
  {
    const Vector u = w.cwiseProduct(inv_a);
    double dv = -smoothed_beta.dot(u);
    if (!tau_g_floored) dv += 0.5 * w.dot(u) / tau_g;
    dv -= 0.5 * Ginv.diagonal().dot(inv_a);
    (*grad)[2 * p + n] = dv * hp.nugget_g;
  }
  return obj;
}

double CoordinateModel::lambda_at(const Matrix& base_X, const Vector& theta) const {
  const Vector cg = correlation_vector(base_X, theta, Lengthscales{hp.rho_g});
  return std::exp(latent_trend + cg.dot(latent_weights));
}

HetGpModel HetGpModel::assemble(const SimulationDataset& data,
                                std::vector<CoordinateHyperparams> hps) {
  const int n = data.n_unique();
  const int d = data.output_dim();
  if (static_cast<int>(hps.size()) != d)
    throw std::invalid_argument("assemble: one hyperparameter set per output coordinate");

  HetGpModel model;
  model.X_ = data.params();
  model.reps_ = data.reps();
  model.base_n_ = n;
  model.coords_.resize(d);
  const long n_total = data.total_evals();

  Vector inv_a(n);
  for (int i = 0; i < n; ++i) inv_a[i] = 1.0 / model.reps_[i];

  for (int j = 0; j < d; ++j) {
    CoordinateModel& cm = model.coords_[j];
    cm.hp = std::move(hps[j]);
    if (cm.hp.latent.size() != n) throw std::invalid_argument("assemble: latent size");

    const Vector zbar = data.mean_column(j);
    cm.out_mean = zbar.mean();
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (zbar[i] - cm.out_mean) * (zbar[i] - cm.out_mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    cm.out_sd = std::sqrt(std::max(var, 1e-24));
    cm.zbar_std = (zbar.array() - cm.out_mean) / cm.out_sd;

    Vector ss_std(n);
    for (int i = 0; i < n; ++i)
      ss_std[i] = data.squared_deviations(i, j) / (cm.out_sd * cm.out_sd);

    const Matrix Cg = correlation_matrix(model.X_, Lengthscales{cm.hp.rho_g});
    Matrix G = Cg;
    G.diagonal() += cm.hp.nugget_g * inv_a;
    if (chol_with_jitter(G, cm.latent_chol) < 0.0)
      throw SingularMatrixError("assemble: latent covariance not factorable");
    cm.latent_trend = cm.hp.latent.mean();
    const Vector latent_c = cm.hp.latent.array() - cm.latent_trend;
    cm.latent_weights = chol_solve(cm.latent_chol, latent_c);
    cm.log_lambda = (Cg * cm.latent_weights).array() + cm.latent_trend;

    const Matrix C = correlation_matrix(model.X_, Lengthscales{cm.hp.rho});
    Matrix Ca = C;
    Ca.diagonal() += cm.log_lambda.array().exp().matrix().cwiseProduct(inv_a);
    if (chol_with_jitter(Ca, cm.chol) < 0.0)
      throw SingularMatrixError("assemble: averaged covariance not factorable");
    cm.alpha = chol_solve(cm.chol, cm.zbar_std);

    const double qf = cm.zbar_std.dot(cm.alpha);
    const double ss_term = (ss_std.array() / cm.log_lambda.array().exp()).sum();
    cm.tau = std::max((qf + ss_term) / static_cast<double>(n_total), kTauFloor);
    cm.tau_g = std::max(latent_c.dot(cm.latent_weights) / n, kTauGFloor);
    cm.objective = het_gp_objective(model.X_, model.reps_, cm.zbar_std, ss_std,
                                    n_total, cm.hp, nullptr);
  }
  return model;
}

HetGpModel fit_het_gp(const SimulationDataset& data, const FitConfig& cfg,
                      const std::vector<CoordinateHyperparams>* warm_start,
                      FitDiagnostics* diagnostics) {
  const int n = data.n_unique();
  const int p = data.param_dim();
  const int d = data.output_dim();
  if (n < cfg.min_design)
    throw std::invalid_argument("fit_het_gp: design smaller than min_design");
  bool any_replication = false;
  for (int a : data.reps())
    if (a >= 2) any_replication = true;
  if (!any_replication && !cfg.allow_no_replication)
    throw std::invalid_argument("fit_het_gp: no replication and allow_no_replication unset");
  if (warm_start && static_cast<int>(warm_start->size()) != d)
    throw std::invalid_argument("fit_het_gp: warm start dimension");

  const long n_total = data.total_evals();
  const PackedBounds bounds = make_bounds(cfg, p, n);
  BoxLbfgs opt;
  opt.max_iterations = cfg.max_iterations;

  std::vector<CoordinateHyperparams> best(d);
  if (diagnostics) diagnostics->objective_trace.assign(d, {});
  for (int j = 0; j < d; ++j) {
    const Vector zbar = data.mean_column(j);
    const double mu = zbar.mean();
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (zbar[i] - mu) * (zbar[i] - mu);
    var = n > 1 ? var / (n - 1) : 0.0;
    const double sd = std::sqrt(std::max(var, 1e-24));
    const Vector zbar_std = (zbar.array() - mu) / sd;
    Vector ss_std(n);
    for (int i = 0; i < n; ++i) ss_std[i] = data.squared_deviations(i, j) / (sd * sd);

    // latent start: per-point log sample variance where available, pooled
    // elsewhere, floored for deterministic-looking outputs
    Vector latent0(n);
    double pooled = 0.0;
    int pooled_n = 0;
    for (int i = 0; i < n; ++i)
      if (data.reps()[i] >= 2) {
        pooled += ss_std[i] / (data.reps()[i] - 1);
        ++pooled_n;
      }
    pooled = pooled_n > 0 ? pooled / pooled_n : 0.1;
    pooled = std::max(pooled, kVarianceFloor);
    for (int i = 0; i < n; ++i) {
      const double sv = data.reps()[i] >= 2
                            ? std::max(ss_std[i] / (data.reps()[i] - 1), kVarianceFloor)
                            : pooled;
      latent0[i] = std::clamp(std::log(sv), -cfg.latent_bound, cfg.latent_bound);
    }

    auto objective = [&](const Vector& x, Vector& g) -> double {
      const CoordinateHyperparams hp = unpack(x, p, n);
      // minimize the negative joint log-likelihood
      const double val = het_gp_objective(data.params(), data.reps(), zbar_std, ss_std,
                                          n_total, hp, &g);
      g = -g;
      return -val;
    };

    std::vector<CoordinateHyperparams> starts;
    {
      CoordinateHyperparams hp;
      hp.rho = Vector::Constant(p, 0.2);
      hp.rho_g = Vector::Constant(p, 0.4);
      hp.latent = latent0;
      hp.nugget_g = 1e-2;
      starts.push_back(hp);
    }
    // the restart stream is shared across coordinates: permuting output
    // coordinates permutes the fits identically
    RngStream rng(cfg.seed, 0xF17, 0);
    for (int r = 1; r < cfg.restarts; ++r) {
      CoordinateHyperparams hp;
      hp.rho.resize(p);
      hp.rho_g.resize(p);
      for (int l = 0; l < p; ++l) {
        hp.rho[l] = std::exp(rng.uniform(std::log(0.03), std::log(3.0)));
        hp.rho_g[l] = std::exp(rng.uniform(std::log(0.05), std::log(3.0)));
      }
      hp.latent = latent0;
      hp.nugget_g = std::exp(rng.uniform(std::log(1e-4), std::log(0.5)));
      starts.push_back(hp);
    }
    if (warm_start) {
      CoordinateHyperparams hp = (*warm_start)[j];
      if (hp.latent.size() < n) {
        Vector extended = latent0;
        extended.head(hp.latent.size()) = hp.latent;
        hp.latent = extended;
      } else if (hp.latent.size() > n) {
        hp.latent = hp.latent.head(n).eval();
      }
      starts.push_back(hp);
    }

    double best_obj = -kInf;
    for (const CoordinateHyperparams& start : starts) {
      Vector x = pack(start);
      double fx = 0.0;
      std::vector<double> trace;
      if (!opt.minimize(objective, x, bounds.lo, bounds.hi, fx,
                        diagnostics ? &trace : nullptr))
        continue;
      if (!std::isfinite(fx)) continue;
      if (-fx > best_obj) {
        best_obj = -fx;
        best[j] = unpack(x, p, n);
        if (diagnostics) {
          for (double& v : trace) v = -v;
          diagnostics->objective_trace[j] = std::move(trace);
        }
      }
    }
    if (!std::isfinite(best_obj))
      throw std::runtime_error("fit_het_gp: every restart diverged");
  }
  return HetGpModel::assemble(data, std::move(best));
}

EmulatorPrediction HetGpModel::predict(const Vector& theta) const {
  EmulatorPrediction out;
  out.mean.resize(output_dim());
  out.var.resize(output_dim());
  predict_into(theta, out.mean, out.var);
  out.intrinsic = intrinsic_at(theta);
  return out;
}

void HetGpModel::predict_into(const Vector& theta, Vector& mean, Vector& var) const {
  for (int j = 0; j < output_dim(); ++j) {
    const CoordinateModel& cm = coords_[j];
    const Vector c = correlation_vector(X_, theta, Lengthscales{cm.hp.rho});
    const Vector v = cm.chol.triangularView<Eigen::Lower>().solve(c);
    const double m_std = c.dot(cm.alpha);
    const double var_std = std::max(cm.tau * (1.0 - v.squaredNorm()), 0.0);
    mean[j] = m_std * cm.out_sd + cm.out_mean;
    var[j] = var_std * cm.out_sd * cm.out_sd;
  }
}

Vector HetGpModel::posterior_cov(const Vector& t1, const Vector& t2) const {
  Vector out(output_dim());
  for (int j = 0; j < output_dim(); ++j) {
    const CoordinateModel& cm = coords_[j];
    const Lengthscales rho{cm.hp.rho};
    const Vector c1 = correlation_vector(X_, t1, rho);
    const Vector c2 = correlation_vector(X_, t2, rho);
    const Vector v1 = cm.chol.triangularView<Eigen::Lower>().solve(c1);
    const Vector v2 = cm.chol.triangularView<Eigen::Lower>().solve(c2);
    out[j] = cm.tau * (gaussian_correlation(t1, t2, rho) - v1.dot(v2)) * cm.out_sd * cm.out_sd;
  }
  return out;
}

int HetGpModel::find_design_point(const Vector& theta) const {
  for (int i = 0; i < n_design(); ++i)
    if ((X_.row(i).transpose() - theta).cwiseAbs().maxCoeff() <= kCoincidenceTol) return i;
  return -1;
}

Vector HetGpModel::intrinsic_at(const Vector& theta) const {
  Vector out(output_dim());
  const int idx = find_design_point(theta);
  for (int j = 0; j < output_dim(); ++j) {
    const CoordinateModel& cm = coords_[j];
    const double lam = idx >= 0 ? std::exp(cm.log_lambda[idx])
                                : cm.lambda_at(X_.topRows(base_n_), theta);
    out[j] = cm.tau * lam * cm.out_sd * cm.out_sd;
  }
  return out;
}

HetGpModel HetGpModel::fantasy_update(const Vector& new_theta, int new_reps) const {
  if (new_reps < 1) throw std::invalid_argument("fantasy_update: new_reps >= 1");
  if (find_design_point(new_theta) >= 0)
    throw std::invalid_argument("fantasy_update: parameter already in the design");

  HetGpModel out = *this;
  const int n = n_design();
  out.X_.conservativeResize(n + 1, param_dim());
  out.X_.row(n) = new_theta.transpose();
  out.reps_.push_back(new_reps);

  for (int j = 0; j < output_dim(); ++j) {
    const CoordinateModel& cm = coords_[j];
    CoordinateModel& nm = out.coords_[j];

    const double lam = cm.lambda_at(X_.topRows(base_n_), new_theta);
    const Vector c_new = correlation_vector(X_, new_theta, Lengthscales{cm.hp.rho});
    const Vector l12 = cm.chol.triangularView<Eigen::Lower>().solve(c_new);
    double pivot = 1.0 + lam / new_reps - l12.squaredNorm();
    pivot = std::max(pivot, 1e-12);

    nm.chol = Matrix::Zero(n + 1, n + 1);
    nm.chol.topLeftCorner(n, n) = cm.chol;
    nm.chol.row(n).head(n) = l12.transpose();
    nm.chol(n, n) = std::sqrt(pivot);

    nm.zbar_std.resize(n + 1);
    nm.zbar_std.head(n) = cm.zbar_std;
    nm.zbar_std[n] = c_new.dot(cm.alpha);  // imputed sample average

    nm.alpha = chol_solve(nm.chol, nm.zbar_std);
    nm.log_lambda.resize(n + 1);
    nm.log_lambda.head(n) = cm.log_lambda;
    nm.log_lambda[n] = std::log(lam);
  }
  return out;
}

HetGpModel HetGpModel::with_added_replicates(const std::vector<int>& delta) const {
  if (static_cast<int>(delta.size()) != n_design())
    throw std::invalid_argument("with_added_replicates: delta size");
  HetGpModel out = *this;
  for (int i = 0; i < n_design(); ++i) {
    if (delta[i] < 0) throw std::invalid_argument("with_added_replicates: negative delta");
    out.reps_[i] += delta[i];
  }
  for (int j = 0; j < output_dim(); ++j) {
    CoordinateModel& nm = out.coords_[j];
    Matrix Ca = correlation_matrix(X_, Lengthscales{nm.hp.rho});
    for (int i = 0; i < n_design(); ++i)
      Ca(i, i) += std::exp(nm.log_lambda[i]) / out.reps_[i];
    if (chol_with_jitter(Ca, nm.chol) < 0.0)
      throw SingularMatrixError("with_added_replicates: covariance not factorable");
    // alpha is kept: the predictive mean stays at the current fit
  }
  return out;
}

void HetGpModel::save(std::ostream& os) const {
  os << std::setprecision(17);
  os << "# het-gp model snapshot\n";
  os << "d " << output_dim() << "\nn " << n_base() << "\np " << param_dim() << "\n";
  for (int j = 0; j < output_dim(); ++j) {
    const CoordinateModel& cm = coords_[j];
    os << "coord " << j << "\n";
    os << "rho";
    for (int l = 0; l < param_dim(); ++l) os << ' ' << cm.hp.rho[l];
    os << "\nrho_g";
    for (int l = 0; l < param_dim(); ++l) os << ' ' << cm.hp.rho_g[l];
    os << "\nnugget_g " << cm.hp.nugget_g << "\nlatent";
    for (int i = 0; i < n_base(); ++i) os << ' ' << cm.hp.latent[i];
    os << "\ntau " << cm.tau << "\ntau_g " << cm.tau_g
       << "\nobjective " << cm.objective << "\n";
  }
}

HetGpModel HetGpModel::load(const SimulationDataset& data, std::istream& is) {
  std::string line;
  int d = -1;
  std::vector<CoordinateHyperparams> hps;
  CoordinateHyperparams current;
  bool in_coord = false;
  auto flush = [&]() {
    if (in_coord) hps.push_back(current);
    current = CoordinateHyperparams{};
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "d") ls >> d;
    else if (key == "coord") { flush(); in_coord = true; }
    else if (key == "rho" || key == "rho_g" || key == "latent") {
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      Vector vec = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
      if (key == "rho") current.rho = vec;
      else if (key == "rho_g") current.rho_g = vec;
      else current.latent = vec;
    } else if (key == "nugget_g") ls >> current.nugget_g;
    // tau / tau_g / objective are derived; ignored on load
  }
  flush();
  if (d < 1 || static_cast<int>(hps.size()) != d)
    throw std::runtime_error("HetGpModel::load: malformed snapshot");
  return assemble(data, std::move(hps));
}

}  // namespace calib
