#include "calib/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace calib {

Method parse_method(const std::string& name) {
  if (name == "ivar") return Method::ivar;
  if (name == "var") return Method::var;
  if (name == "imse") return Method::imse;
  if (name == "unif") return Method::unif;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ivar: return "ivar";
    case Method::var: return "var";
    case Method::imse: return "imse";
    case Method::unif: return "unif";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (n0 < 1 || reps0 < 1 || b < 1 || t_b < 0 || replicates < 1)
    throw std::invalid_argument("config: sizes must be positive");
  if (method != Method::unif) {
    if (a_breve < 1) throw std::invalid_argument("config: a_breve >= 1");
    if (b % a_breve != 0)
      throw std::invalid_argument("config: b must be divisible by a_breve");
    if (b_breve != 0 && b_breve * a_breve != b)
      throw std::invalid_argument("config: b_breve * a_breve must equal b");
  }
  if (fit_restarts < 1) throw std::invalid_argument("config: fit_restarts >= 1");
}

int ExperimentConfig::effective_b_breve() const {
  return b_breve != 0 ? b_breve : b / a_breve;
}

int ExperimentConfig::effective_candidates(int p) const {
  if (candidates != 0) return candidates;
  return p <= 3 ? 200 : 500;
}

std::string ExperimentConfig::effective_ref(int p) const {
  if (!ref.empty()) return ref;
  return p == 2 ? "grid:50" : "lhs:2500";
}

void ExperimentConfig::set_key(const std::string& key, const std::string& value) {
  if (key == "simulator") simulator = value;
  else if (key == "n0") n0 = std::stoi(value);
  else if (key == "reps0") reps0 = std::stoi(value);
  else if (key == "b") b = std::stoi(value);
  else if (key == "T_b" || key == "t_b") t_b = std::stoi(value);
  else if (key == "a_breve") a_breve = std::stoi(value);
  else if (key == "b_breve") b_breve = std::stoi(value);
  else if (key == "candidates") candidates = std::stoi(value);
  else if (key == "ref") ref = value;
  else if (key == "method") method = parse_method(value);
  else if (key == "replicates") replicates = std::stoi(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "outdir") outdir = value;
  else if (key == "fit_restarts") fit_restarts = std::stoi(value);
  else if (key == "fit_max_iterations") fit_max_iterations = std::stoi(value);
  else if (key == "warm_start") warm_start = value == "1" || value == "true";
  else if (key == "truth_reps") truth_reps = std::stoi(value);
  else if (key == "obs_mean_reps") obs_mean_reps = std::stoi(value);
  else if (key == "sigma") sigma = value;
  else if (key.rfind("sim.", 0) == 0) simulator_overrides[key.substr(4)] = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::load(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) throw std::invalid_argument("config: key '" + key + "' without value");
    cfg.set_key(key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  return load(is);
}

void ExperimentConfig::save(std::ostream& os) const {
  os << "simulator " << simulator << "\n";
  os << "n0 " << n0 << "\nreps0 " << reps0 << "\nb " << b << "\nT_b " << t_b << "\n";
  os << "a_breve " << a_breve << "\nb_breve " << b_breve << "\n";
  os << "candidates " << candidates << "\n";
  if (!ref.empty()) os << "ref " << ref << "\n";
  os << "method " << method_name(method) << "\n";
  os << "replicates " << replicates << "\nseed " << seed << "\n";
  os << "outdir " << outdir << "\n";
  os << "fit_restarts " << fit_restarts << "\n";
  os << "fit_max_iterations " << fit_max_iterations << "\n";
  os << "warm_start " << (warm_start ? 1 : 0) << "\n";
  os << "truth_reps " << truth_reps << "\nobs_mean_reps " << obs_mean_reps << "\n";
  if (!sigma.empty()) os << "sigma " << sigma << "\n";
  for (const auto& [k, v] : simulator_overrides) os << "sim." << k << " " << v << "\n";
}

}  // namespace calib
