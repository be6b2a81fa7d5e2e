#pragma once

#include "calib/dataset.hpp"
#include "calib/kernel.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace calib {

struct FitConfig {
  int restarts = 5;
  int max_iterations = 150;
  int min_design = 5;
  bool allow_no_replication = false;
  std::uint64_t seed = 0;
  double rho_lo = 1e-3, rho_hi = 10.0;
  double nugget_lo = 1e-2, nugget_hi = 1.0;
  double latent_bound = 20.0;
};

/// Free hyperparameters of one output coordinate.
struct CoordinateHyperparams {
  Vector rho;     // mean-GP squared lengthscales
  Vector rho_g;   // latent-GP squared lengthscales
  Vector latent;  // noise latents, one per design point
  double nugget_g = 1e-2;
};

/// Fitted state of one output coordinate, in standardized output units.
///
/// The averaged-data covariance is tau * (C + diag(lambda_i / a_i)); lambda
/// are intrinsic variances relative to tau, their logs smoothed from the
/// latents through the noise GP.
struct CoordinateModel {
  CoordinateHyperparams hp;
  double tau = 1.0;
  double tau_g = 1.0;
  double out_mean = 0.0;
  double out_sd = 1.0;
  Vector log_lambda;      // at every current design point (fantasies included)
  double latent_trend = 0.0;  // mean log-noise level the latent GP reverts to
  Vector zbar_std;
  Matrix chol;            // lower factor of C + diag(lambda_i / a_i)
  Vector alpha;           // (C + diag(lambda_i / a_i))^{-1} zbar_std
  Matrix latent_chol;     // lower factor of C^g + g A^{-1}, base design only
  Vector latent_weights;  // (C^g + g A^{-1})^{-1} latent
  double objective = 0.0;

  /// Intrinsic variance relative to tau at a new parameter.
  double lambda_at(const Matrix& base_X, const Vector& theta) const;
};

struct EmulatorPrediction {
  Vector mean;
  Vector var;
  Vector intrinsic;
};

/// Per-output-coordinate stochastic-kriging emulator with replication and
/// latent-GP noise inference. Immutable once fitted; the hypothetical-update
/// factories return new values.
class HetGpModel {
public:
  int param_dim() const { return static_cast<int>(X_.cols()); }
  int output_dim() const { return static_cast<int>(coords_.size()); }
  int n_design() const { return static_cast<int>(X_.rows()); }
  int n_base() const { return base_n_; }

  const Matrix& design() const { return X_; }
  const std::vector<int>& reps() const { return reps_; }
  const CoordinateModel& coord(int j) const { return coords_[j]; }

  EmulatorPrediction predict(const Vector& theta) const;
  void predict_into(const Vector& theta, Vector& mean, Vector& var) const;

  /// Residual covariance between predictions at t1 and t2, per coordinate.
  Vector posterior_cov(const Vector& t1, const Vector& t2) const;

  /// Intrinsic variances at theta (design value when theta coincides with a
  /// design point, latent-GP prediction otherwise).
  Vector intrinsic_at(const Vector& theta) const;

  int find_design_point(const Vector& theta) const;

  /// Model extended with a hypothetical parameter carrying new_reps unseen
  /// replicates, their sample average imputed by the current mean.
  /// Hyperparameters stay fixed; predictive means are unchanged everywhere.
  HetGpModel fantasy_update(const Vector& new_theta, int new_reps) const;

  /// Model whose averaged-data covariance reflects reps + delta replicates,
  /// with the predictive mean frozen at the current fit.
  HetGpModel with_added_replicates(const std::vector<int>& delta) const;

  /// Deterministic assembly from dataset + hyperparameters (no optimization).
  static HetGpModel assemble(const SimulationDataset& data,
                             std::vector<CoordinateHyperparams> hps);

  void save(std::ostream& os) const;
  /// Rebuilds a model saved with save() on top of its dataset snapshot.
  static HetGpModel load(const SimulationDataset& data, std::istream& is);

  friend HetGpModel fit_het_gp(const SimulationDataset& data, const FitConfig& cfg,
                               const std::vector<CoordinateHyperparams>* warm_start,
                               struct FitDiagnostics* diagnostics);

private:
  Matrix X_;
  std::vector<int> reps_;
  std::vector<CoordinateModel> coords_;
  int base_n_ = 0;
};

/// Objective values of each accepted optimizer step for the winning start,
/// one trace per output coordinate.
struct FitDiagnostics {
  std::vector<std::vector<double>> objective_trace;
};

/// Maximizes the joint log-likelihood per output coordinate over restarts.
/// A warm start, when given, is run as one additional start.
HetGpModel fit_het_gp(const SimulationDataset& data, const FitConfig& cfg = {},
                      const std::vector<CoordinateHyperparams>* warm_start = nullptr,
                      FitDiagnostics* diagnostics = nullptr);

/// Joint log-likelihood of one coordinate (used by tests for gradient and
/// ascent checks). Gradient layout: [d/dlog rho, d/dlog rho_g, d/dlatent,
/// d/dlog g].
double het_gp_objective(const Matrix& X, const std::vector<int>& reps,
                        const Vector& zbar_std, const Vector& ss_std, long n_total,
                        const CoordinateHyperparams& hp, Vector* grad);

}  // namespace calib
