#include <doctest.h>

#include "calib/metrics.hpp"
#include "calib/rng.hpp"

using namespace calib;

TEST_CASE("mad") {
  Vector a(4), b(4);
  a << 1, 2, 3, 4;
  b = a;
  CHECK(mad(a, b) == 0.0);
  b.array() += 0.25;
  CHECK(mad(a, b) == doctest::Approx(0.25));

  // independent direct-summation oracle on random data
  RngStream rng(2, 0, 0);
  Vector x(101), y(101);
  for (int i = 0; i < 101; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  double oracle = 0.0;
  for (int i = 0; i < 101; ++i) oracle += std::abs(x[i] - y[i]);
  oracle /= 101;
  CHECK(mad(x, y) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("interval score closed forms") {
  CHECK(interval_score_bounds(0.2, 0.8, 0.5, 0.1) == doctest::Approx(0.6));
  CHECK(interval_score_bounds(0.3, 0.8, 0.1, 0.1) == doctest::Approx(4.5));
  CHECK(interval_score_bounds(0.3, 0.8, 0.9, 0.1) == doctest::Approx(0.5 + 20.0 * 0.1));
}

TEST_CASE("interval score of uniform sample sits near 0.9") {
  RngStream rng(4, 0, 0);
  std::vector<double> sample(20000);
  for (double& v : sample) v = rng.uniform();
  const double score = interval_score(sample, 0.5, 0.10);
  CHECK(score == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("quantiles interpolate") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(empirical_quantile(v, 0.0) == 1.0);
  CHECK(empirical_quantile(v, 1.0) == 5.0);
  CHECK(empirical_quantile(v, 0.5) == 3.0);
  CHECK(empirical_quantile(v, 0.25) == doctest::Approx(2.0));
}

TEST_CASE("mape") {
  Vector truth(3), est(3);
  truth << 10, 20, 40;
  est = truth;
  CHECK(mape(est, truth) == 0.0);
  est = 1.1 * truth;
  CHECK(mape(est, truth) == doctest::Approx(10.0).epsilon(1e-12));

  // zero truths are excluded and counted
  Vector t2(3), e2(3);
  t2 << 0, 10, 10;
  e2 << 5, 11, 9;
  int excluded = 0;
  CHECK(mape(e2, t2, &excluded) == doctest::Approx(10.0));
  CHECK(excluded == 1);
}
