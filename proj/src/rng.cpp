#include "calib/rng.hpp"

#include <stdexcept>

namespace calib {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stage, std::uint64_t slot) {
  const std::uint64_t key = mix64(mix64(mix64(seed) ^ stage) ^ (slot * 0x9e3779b97f4a7c15ULL));
  engine_.seed(key);
  engine_.discard(4);
}

double RngStream::uniform() {
  ++draws_;
  // 53-bit mantissa, shifted off zero
  const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  return u;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  ++draws_;
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

std::int64_t RngStream::binomial(std::int64_t n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::invalid_argument("RngStream::binomial: bad arguments");
  if (n == 0 || p == 0.0) { ++draws_; return 0; }
  if (p == 1.0) { ++draws_; return n; }
  ++draws_;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(engine_);
}

std::uint64_t RngStream::integer(std::uint64_t bound) {
  ++draws_;
  std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace calib
