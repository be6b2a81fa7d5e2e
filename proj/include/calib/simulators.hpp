#pragma once

#include "calib/linalg.hpp"
#include "calib/rng.hpp"

#include <map>
#include <optional>
#include <string>

namespace calib {

/// A stochastic test model. Parameters enter on the unit cube and are mapped
/// to the native prior box internally.
struct SimulatorSpec {
  std::string name;
  int p = 0;
  int d = 0;
  Matrix prior_box;    // p x 2, native [lo, hi] per dimension
  Vector theta_star;   // unit-cube coordinates of the data-generating parameter
  Vector sigma_diag;   // default residual variances for observed data

  // epidemic settings
  long population = 0;
  long initial_infected = 0;
  int horizon_days = 0;

  bool has_closed_form = false;  // analytic mean / noise available

  Vector to_native(const Vector& theta01) const;
  Vector to_unit(const Vector& native) const;
};

/// Known simulators: sin1d, unimodal, banana, bimodal, sir, seirds.
/// Overrides (population, horizon_days, ...) are applied when present.
SimulatorSpec make_simulator(const std::string& name,
                             const std::map<std::string, std::string>& overrides = {});

struct SimOutput {
  Vector values;
  std::uint64_t draw_count = 0;
};

/// Draws one stochastic output at theta01 in [0,1]^p.
SimOutput simulate(const SimulatorSpec& spec, const Vector& theta01, RngStream& rng);

/// Analytic expected output; only for has_closed_form simulators.
Vector expected_output(const SimulatorSpec& spec, const Vector& theta01);

/// Analytic intrinsic variances (diagonal of the noise covariance); only for
/// has_closed_form simulators.
Vector intrinsic_variance(const SimulatorSpec& spec, const Vector& theta01);

/// sin(10 theta) + N(0, 1.1 + 0.05 sin(2 pi theta)).
double eval_sin1d(double theta, RngStream& rng);

struct ObservedData {
  Vector y;
  Vector eta_star;     // expected output used at theta_star
  Vector sigma_diag;   // residual variances
};

/// Draws observed data y = eta(theta*) + MVN(0, diag(sigma)). For simulators
/// without a closed form, eta(theta*) is the average of n_mean_reps runs; the
/// default sigma is then 1% of |eta(theta*)| per coordinate.
ObservedData generate_observed_data(const SimulatorSpec& spec,
                                    const std::optional<Vector>& sigma_diag,
                                    RngStream& rng, int n_mean_reps = 1000);

}  // namespace calib
