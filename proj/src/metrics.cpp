#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace calib {

double mad(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size() || estimate.size() == 0)
    throw std::invalid_argument("mad: size mismatch");
  return (estimate - truth).cwiseAbs().mean();
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("empirical_quantile: q in [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - lo;
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

double interval_score_bounds(double lower, double upper, double theta_star, double alpha) {
  double score = upper - lower;
  if (theta_star < lower) score += 2.0 / alpha * (lower - theta_star);
  if (theta_star > upper) score += 2.0 / alpha * (theta_star - upper);
  return score;
}

double interval_score(std::span<const double> acquired, double theta_star, double alpha) {
  const double lower = empirical_quantile(acquired, alpha / 2.0);
  const double upper = empirical_quantile(acquired, 1.0 - alpha / 2.0);
  return interval_score_bounds(lower, upper, theta_star, alpha);
}

double mape(const Vector& estimates, const Vector& truths, int* excluded) {
  if (estimates.size() != truths.size() || estimates.size() == 0)
    throw std::invalid_argument("mape: size mismatch");
  double acc = 0.0;
  int used = 0, skipped = 0;
  for (Eigen::Index i = 0; i < truths.size(); ++i) {
    if (truths[i] == 0.0) {
      ++skipped;
      continue;
    }
    acc += std::abs((truths[i] - estimates[i]) / truths[i]);
    ++used;
  }
  if (excluded) *excluded = skipped;
  if (used == 0) throw std::invalid_argument("mape: every truth value is zero");
  return 100.0 * acc / used;
}

}  // namespace calib
