#pragma once

#include "calib/linalg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace calib {

/// Replicated simulation data: unique parameters, per-parameter replicate
/// counts, raw vector outputs, and running per-coordinate sample moments.
///
/// Means and squared-deviation sums are maintained incrementally and must
/// match a full recomputation to 1e-12; see check_moments().
class SimulationDataset {
public:
  SimulationDataset(int p, int d) : p_(p), d_(d) {
    if (p < 1 || d < 1) throw std::invalid_argument("SimulationDataset: p, d >= 1");
  }

  int param_dim() const { return p_; }
  int output_dim() const { return d_; }
  int n_unique() const { return static_cast<int>(reps_.size()); }
  long total_evals() const;

  /// Unique parameters as rows (n x p).
  const Matrix& params() const { return params_; }
  const std::vector<int>& reps() const { return reps_; }
  const std::vector<Vector>& outputs_at(int i) const { return outputs_[i]; }

  /// Running mean of output coordinate j at parameter i.
  double mean(int i, int j) const { return mean_(i, j); }
  Vector mean_row(int i) const { return mean_.row(i); }
  /// Column of means for output coordinate j, one entry per unique parameter.
  Vector mean_column(int j) const { return mean_.col(j); }

  /// Unbiased sample variance (requires reps >= 2).
  double sample_variance(int i, int j) const;
  /// Sum of squared deviations from the mean (zero when reps == 1).
  double squared_deviations(int i, int j) const { return m2_(i, j); }

  /// Index of the parameter within max-norm 1e-10 of theta, or -1.
  int find_parameter(const Vector& theta) const;

  /// Appends a new unique parameter with its replicate outputs.
  int add_point(const Vector& theta, const std::vector<Vector>& outs);

  /// Adds replicates to an existing parameter, updating cached moments.
  void add_replicates(int idx, const std::vector<Vector>& outs);

  /// Largest |cached - recomputed| across all means and variances.
  double check_moments() const;

  void save(std::ostream& os) const;
  static SimulationDataset load(std::istream& is);
  void save_file(const std::string& path) const;
  static SimulationDataset load_file(const std::string& path);

private:
  int p_, d_;
  Matrix params_{0, 0};
  std::vector<int> reps_;
  std::vector<std::vector<Vector>> outputs_;
  Matrix mean_{0, 0};
  Matrix m2_{0, 0};
};

constexpr double kCoincidenceTol = 1e-10;

}  // namespace calib
