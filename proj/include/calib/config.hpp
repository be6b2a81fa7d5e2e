#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace calib {

enum class Method { ivar, var, imse, unif };

Method parse_method(const std::string& name);
std::string method_name(Method m);

/// Flat key-value experiment configuration. Unknown keys starting with
/// "sim." are forwarded to the simulator as overrides.
struct ExperimentConfig {
  std::string simulator = "unimodal";
  int n0 = 15;
  int reps0 = 2;
  int b = 16;
  int t_b = 8;
  int a_breve = 2;
  int b_breve = 0;  // 0: derived as b / a_breve
  int candidates = 0;  // 0: 200 for p <= 3, 500 otherwise
  std::string ref;     // empty: grid:50 for p == 2, lhs:2500 otherwise
  Method method = Method::ivar;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::string outdir = "out";
  int fit_restarts = 5;
  int fit_max_iterations = 150;
  bool warm_start = true;
  int truth_reps = 1000;
  int obs_mean_reps = 1000;
  std::string sigma;  // comma-separated residual variances, empty = default
  std::map<std::string, std::string> simulator_overrides;

  void validate() const;
  int effective_b_breve() const;
  int effective_candidates(int p) const;
  std::string effective_ref(int p) const;

  static ExperimentConfig load(std::istream& is);
  static ExperimentConfig load_file(const std::string& path);
  void save(std::ostream& os) const;

  void set_key(const std::string& key, const std::string& value);
};

}  // namespace calib
