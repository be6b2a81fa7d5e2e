#pragma once

#include "calib/linalg.hpp"
#include "calib/rng.hpp"

#include <string>

namespace calib {

/// Latin hypercube sample of m points in [0,1]^p; every one-dimensional
/// projection lands in each of the m equal bins exactly once.
Matrix latin_hypercube(int m, int p, RngStream& rng);

/// Independent uniform draws from [0,1]^p.
Matrix uniform_sample(int m, int p, RngStream& rng);

/// Corner-anchored grid with k points per axis (coordinates i/(k-1)),
/// rows in lexicographic order. p dimensions, k^p rows.
Matrix corner_grid(int k, int p);

/// Specification string for reference sets: "grid:50" or "lhs:2500".
struct ReferenceSpec {
  enum class Kind { grid, lhs } kind = Kind::grid;
  int size = 50;  // per-axis for grid, total for lhs

  static ReferenceSpec parse(const std::string& text);
  std::string to_string() const;
};

Matrix make_reference_set(const ReferenceSpec& spec, int p, RngStream& rng);

}  // namespace calib
