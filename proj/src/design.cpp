#include "calib/design.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace calib {

Matrix latin_hypercube(int m, int p, RngStream& rng) {
  if (m < 1 || p < 1) throw std::invalid_argument("latin_hypercube: bad sizes");
  Matrix X(m, p);
  std::vector<int> perm(m);
  for (int l = 0; l < p; ++l) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.integer(static_cast<std::uint64_t>(i) + 1)]);
    for (int i = 0; i < m; ++i)
      X(i, l) = (perm[i] + rng.uniform()) / m;
  }
  return X;
}

Matrix uniform_sample(int m, int p, RngStream& rng) {
  Matrix X(m, p);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < p; ++l) X(i, l) = rng.uniform();
  return X;
}

Matrix corner_grid(int k, int p) {
  if (k < 2 || p < 1) throw std::invalid_argument("corner_grid: bad sizes");
  long rows = 1;
  for (int l = 0; l < p; ++l) rows *= k;
  Matrix X(rows, p);
  for (long r = 0; r < rows; ++r) {
    long rem = r;
    for (int l = p - 1; l >= 0; --l) {
      X(r, l) = static_cast<double>(rem % k) / (k - 1);
      rem /= k;
    }
  }
  return X;
}

ReferenceSpec ReferenceSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("ReferenceSpec: expected kind:size, got '" + text + "'");
  ReferenceSpec spec;
  const std::string kind = text.substr(0, colon);
  if (kind == "grid") spec.kind = Kind::grid;
  else if (kind == "lhs") spec.kind = Kind::lhs;
  else throw std::invalid_argument("ReferenceSpec: unknown kind '" + kind + "'");
  spec.size = std::stoi(text.substr(colon + 1));
  if (spec.size < 2) throw std::invalid_argument("ReferenceSpec: size too small");
  return spec;
}

std::string ReferenceSpec::to_string() const {
  return (kind == Kind::grid ? "grid:" : "lhs:") + std::to_string(size);
}

Matrix make_reference_set(const ReferenceSpec& spec, int p, RngStream& rng) {
  if (spec.kind == ReferenceSpec::Kind::grid) return corner_grid(spec.size, p);
  return latin_hypercube(spec.size, p, rng);
}

}  // namespace calib
