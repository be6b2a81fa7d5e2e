#include "calib/simulators.hpp"

#include <cmath>
#include <stdexcept>

namespace calib {

namespace {

Matrix box(std::initializer_list<std::pair<double, double>> ranges) {
  Matrix b(static_cast<int>(ranges.size()), 2);
  int r = 0;
  for (auto [lo, hi] : ranges) {
    b(r, 0) = lo;
    b(r, 1) = hi;
    ++r;
  }
  return b;
}

double get_override(const std::map<std::string, std::string>& ov,
                    const std::string& key, double fallback) {
  auto it = ov.find(key);
  return it == ov.end() ? fallback : std::stod(it->second);
}

Vector unimodal_mean(const Vector& t) {
  const double u = 20.0 * t[0] - 10.0;
  const double v = 20.0 * t[1] - 10.0;
  Vector eta(1);
  eta[0] = 0.26 * (u * u + v * v) - 0.48 * u * v;
  return eta;
}

Vector unimodal_noise(const Vector& t) {
  const double dx = t[0] - 0.85, dy = t[1] - 0.85;
  Vector r(1);
  r[0] = 2.0 / (2.0 * M_PI * 0.05) * std::exp(-(dx * dx + dy * dy) / (2.0 * 0.05));
  return r;
}

Vector banana_mean(const Vector& t) {
  const double u = 40.0 * t[0] - 20.0;
  Vector eta(2);
  eta[0] = 0.03 * u;
  eta[1] = 15.0 * t[1] - 15.0 + 0.06 * u * u;
  return eta;
}

Vector banana_noise(const Vector& t) {
  const Vector eta = banana_mean(t);
  Vector r(2);
  if (t[0] < 0.5) {
    r[0] = 0.01 * std::abs(eta[0]);
    r[1] = 0.01 * std::abs(eta[1]);
  } else {
    r[0] = 0.1 * std::abs(eta[0]);
    r[1] = 0.2 * std::abs(eta[1]);
  }
  return r;
}

Vector bimodal_mean(const Vector& t) {
  const double u = 12.0 * t[0] - 6.0;
  const double v = 12.0 * t[1] - 4.0;
  Vector eta(2);
  eta[0] = std::sqrt(0.2) * (v - u * u);
  eta[1] = std::sqrt(0.75) * (v - u);
  return eta;
}

Vector bimodal_noise(const Vector& t) {
  const double r = 0.5 + 2.0 * (t[0] * t[0] + t[1] * t[1]);
  return Vector::Constant(2, r);
}

Vector sin1d_mean(const Vector& t) {
  Vector eta(1);
  eta[0] = std::sin(10.0 * t[0]);
  return eta;
}

Vector sin1d_noise(const Vector& t) {
  Vector r(1);
  r[0] = 1.1 + 0.05 * std::sin(2.0 * M_PI * t[0]);
  return r;
}

// One outflow draw per source compartment and day; counts stay integral and
// the population total is conserved exactly.
Vector sir_run(const SimulatorSpec& spec, const Vector& native, RngStream& rng) {
  const double beta = native[0], gamma = native[1];
  long S = spec.population - spec.initial_infected;
  long I = spec.initial_infected;
  long R = 0;
  const double n = static_cast<double>(spec.population);
  double sumS = 0.0, sumI = 0.0, sumR = 0.0;
  for (int day = 0; day < spec.horizon_days; ++day) {
    const double p_inf = 1.0 - std::exp(-beta * static_cast<double>(I) / n);
    const double p_rem = 1.0 - std::exp(-gamma);
    const long new_inf = rng.binomial(S, p_inf);
    const long new_rem = rng.binomial(I, p_rem);
    S -= new_inf;
    I += new_inf - new_rem;
    R += new_rem;
    sumS += S;
    sumI += I;
    sumR += R;
  }
  Vector out(3);
  out << sumS / spec.horizon_days, sumI / spec.horizon_days, sumR / spec.horizon_days;
  return out;
}

// Flows: S->E at beta*I/N + import, E->I at delta, I->{R,D} split by the case
// fatality ratio, R->S at the waning rate. Sixth output tracks the running
// count of infections (entries into E) averaged over the horizon.
Vector seirds_run(const SimulatorSpec& spec, const Vector& native, RngStream& rng) {
  const double beta = native[0], delta = native[1], gamma_r = native[2],
               gamma_d = native[3], mu = native[4], import = native[5],
               waning = native[6];
  long S = spec.population - spec.initial_infected;
  long E = spec.initial_infected;
  long I = 0, R = 0, D = 0;
  long cum_inf = 0;
  const double n = static_cast<double>(spec.population);
  Vector sums = Vector::Zero(6);
  for (int day = 0; day < spec.horizon_days; ++day) {
    const double rate_exposed = beta * static_cast<double>(I) / n + import;
    const double rate_leave_i = gamma_r * (1.0 - mu) + gamma_d * mu;
    const long new_e = rng.binomial(S, 1.0 - std::exp(-rate_exposed));
    const long new_i = rng.binomial(E, 1.0 - std::exp(-delta));
    const long leave_i = rng.binomial(I, 1.0 - std::exp(-rate_leave_i));
    const double frac_d = rate_leave_i > 0.0 ? gamma_d * mu / rate_leave_i : 0.0;
    const long new_d = rng.binomial(leave_i, frac_d);
    const long new_r = leave_i - new_d;
    const long new_s = rng.binomial(R, 1.0 - std::exp(-waning));
    S += new_s - new_e;
    E += new_e - new_i;
    I += new_i - leave_i;
    R += new_r - new_s;
    D += new_d;
    cum_inf += new_e;
    sums[0] += S;
    sums[1] += E;
    sums[2] += I;
    sums[3] += R;
    sums[4] += D;
    sums[5] += cum_inf;
  }
  return sums / spec.horizon_days;
}

}  // namespace

Vector SimulatorSpec::to_native(const Vector& theta01) const {
  if (theta01.size() != p) throw std::invalid_argument("to_native: dimension mismatch");
  Vector out(p);
  for (int l = 0; l < p; ++l)
    out[l] = prior_box(l, 0) + theta01[l] * (prior_box(l, 1) - prior_box(l, 0));
  return out;
}

Vector SimulatorSpec::to_unit(const Vector& native) const {
  Vector out(p);
  for (int l = 0; l < p; ++l)
    out[l] = (native[l] - prior_box(l, 0)) / (prior_box(l, 1) - prior_box(l, 0));
  return out;
}

SimulatorSpec make_simulator(const std::string& name,
                             const std::map<std::string, std::string>& overrides) {
  SimulatorSpec s;
  s.name = name;
  if (name == "sin1d") {
    s.p = 1;
    s.d = 1;
    s.prior_box = box({{0.0, 1.0}});
    s.theta_star = Vector::Constant(1, 0.5);
    s.sigma_diag = Vector::Constant(1, 0.05 * 0.05);
    s.has_closed_form = true;
  } else if (name == "unimodal") {
    s.p = 2;
    s.d = 1;
    s.prior_box = box({{0.0, 1.0}, {0.0, 1.0}});
    s.theta_star = Vector::Constant(2, 0.5);
    s.sigma_diag = Vector::Constant(1, 0.1 * 0.1);
    s.has_closed_form = true;
  } else if (name == "banana") {
    s.p = 2;
    s.d = 2;
    s.prior_box = box({{0.0, 1.0}, {0.0, 1.0}});
    s.theta_star = Vector(2);
    s.theta_star << 0.5, 0.75;
    s.sigma_diag = Vector(2);
    s.sigma_diag << 0.03, 0.5;
    s.has_closed_form = true;
  } else if (name == "bimodal") {
    s.p = 2;
    s.d = 2;
    s.prior_box = box({{0.0, 1.0}, {0.0, 1.0}});
    s.theta_star = Vector::Constant(2, 2.0 / 3.0);
    s.sigma_diag = Vector::Constant(2, 0.5);
    s.has_closed_form = true;
  } else if (name == "sir") {
    s.p = 2;
    s.d = 3;
    s.prior_box = box({{0.1, 0.3}, {0.05, 0.15}});
    s.theta_star = Vector::Constant(2, 0.5);
    s.population = 1010;
    s.initial_infected = 10;
    s.horizon_days = 150;
  } else if (name == "seirds") {
    s.p = 7;
    s.d = 6;
    s.prior_box = box({{0.15, 0.45},
                       {0.15, 0.45},
                       {0.04, 0.12},
                       {0.06, 0.18},
                       {0.35, 1.00},
                       {0.05, 0.15},
                       {0.005, 0.015}});
    s.theta_star = Vector::Constant(7, 0.5);
    s.population = 1010;
    s.initial_infected = 10;
    s.horizon_days = 150;
  } else {
    throw std::invalid_argument("unknown simulator '" + name + "'");
  }
  if (s.population > 0) {
    s.population = static_cast<long>(get_override(overrides, "population", s.population));
    s.initial_infected =
        static_cast<long>(get_override(overrides, "initial_infected", s.initial_infected));
    s.horizon_days = static_cast<int>(get_override(overrides, "horizon_days", s.horizon_days));
    if (s.population <= s.initial_infected || s.horizon_days < 1)
      throw std::invalid_argument("bad epidemic settings");
  }
  return s;
}

SimOutput simulate(const SimulatorSpec& spec, const Vector& theta01, RngStream& rng) {
  const std::uint64_t before = rng.draw_count();
  SimOutput out;
  if (spec.has_closed_form) {
    Vector eta, noise;
    if (spec.name == "sin1d") {
      eta = sin1d_mean(theta01);
      noise = sin1d_noise(theta01);
    } else if (spec.name == "unimodal") {
      eta = unimodal_mean(theta01);
      noise = unimodal_noise(theta01);
    } else if (spec.name == "banana") {
      eta = banana_mean(theta01);
      noise = banana_noise(theta01);
    } else {
      eta = bimodal_mean(theta01);
      noise = bimodal_noise(theta01);
    }
    out.values = eta;
    for (int j = 0; j < spec.d; ++j)
      out.values[j] += rng.normal(0.0, std::sqrt(std::max(noise[j], 0.0)));
  } else {
    const Vector native = spec.to_native(theta01);
    out.values = spec.name == "sir" ? sir_run(spec, native, rng) : seirds_run(spec, native, rng);
  }
  out.draw_count = rng.draw_count() - before;
  for (int j = 0; j < spec.d; ++j)
    if (!std::isfinite(out.values[j])) throw std::runtime_error("simulate: non-finite output");
  return out;
}

Vector expected_output(const SimulatorSpec& spec, const Vector& theta01) {
  if (!spec.has_closed_form) throw std::logic_error("expected_output: no closed form");
  if (spec.name == "sin1d") return sin1d_mean(theta01);
  if (spec.name == "unimodal") return unimodal_mean(theta01);
  if (spec.name == "banana") return banana_mean(theta01);
  return bimodal_mean(theta01);
}

Vector intrinsic_variance(const SimulatorSpec& spec, const Vector& theta01) {
  if (!spec.has_closed_form) throw std::logic_error("intrinsic_variance: no closed form");
  if (spec.name == "sin1d") return sin1d_noise(theta01);
  if (spec.name == "unimodal") return unimodal_noise(theta01);
  if (spec.name == "banana") return banana_noise(theta01);
  return bimodal_noise(theta01);
}

double eval_sin1d(double theta, RngStream& rng) {
  Vector t(1);
  t[0] = theta;
  return sin1d_mean(t)[0] + rng.normal(0.0, std::sqrt(sin1d_noise(t)[0]));
}

ObservedData generate_observed_data(const SimulatorSpec& spec,
                                    const std::optional<Vector>& sigma_diag,
                                    RngStream& rng, int n_mean_reps) {
  ObservedData obs;
  if (spec.has_closed_form) {
    obs.eta_star = expected_output(spec, spec.theta_star);
  } else {
    if (n_mean_reps < 1) throw std::invalid_argument("generate_observed_data: n_mean_reps >= 1");
    Vector acc = Vector::Zero(spec.d);
    for (int r = 0; r < n_mean_reps; ++r)
      acc += simulate(spec, spec.theta_star, rng).values;
    obs.eta_star = acc / n_mean_reps;
  }
  if (sigma_diag) {
    obs.sigma_diag = *sigma_diag;
  } else if (spec.has_closed_form) {
    obs.sigma_diag = spec.sigma_diag;
  } else {
    obs.sigma_diag = 0.01 * obs.eta_star.cwiseAbs();
  }
  if (obs.sigma_diag.size() != spec.d)
    throw std::invalid_argument("generate_observed_data: sigma dimension");
  obs.y = obs.eta_star;
  for (int j = 0; j < spec.d; ++j)
    obs.y[j] += rng.normal(0.0, std::sqrt(obs.sigma_diag[j]));
  return obs;
}

}  // namespace calib
