#pragma once

#include "calib/linalg.hpp"

#include <span>

namespace calib {

/// Mean absolute difference between two fields over the same reference set.
double mad(const Vector& estimate, const Vector& truth);

/// Linear-interpolation empirical quantile (R type 7).
double empirical_quantile(std::span<const double> values, double q);

/// Interval score from explicit bounds:
/// (u - l) + (2/alpha) (l - t) 1{t < l} + (2/alpha) (t - u) 1{t > u}.
double interval_score_bounds(double lower, double upper, double theta_star, double alpha);

/// Interval score with bounds taken as the alpha/2 and 1-alpha/2 empirical
/// quantiles of the acquired values.
double interval_score(std::span<const double> acquired, double theta_star, double alpha);

/// 100 * mean |truth - estimate| / |truth|; zero truths are excluded and
/// counted through excluded when given.
double mape(const Vector& estimates, const Vector& truths, int* excluded = nullptr);

}  // namespace calib
