#pragma once

#include <cstdint>
#include <random>

namespace calib {

/// Deterministic random stream keyed by (seed, stage, slot).
///
/// Every simulator evaluation, sampling pass and optimizer restart owns its
/// own stream, so thread scheduling and evaluation order cannot change the
/// draws an evaluation sees.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stage, std::uint64_t slot);

  /// U(0,1), strictly inside the open interval.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd);
  std::int64_t binomial(std::int64_t n, double p);
  std::uint64_t integer(std::uint64_t bound);  // uniform on [0, bound)

  /// Number of variates drawn so far (replay audit).
  std::uint64_t draw_count() const { return draws_; }

private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

/// splitmix64 finalizer; used to mix stream keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace calib
