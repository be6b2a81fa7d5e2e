#include "calib/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace calib {

long SimulationDataset::total_evals() const {
  long total = 0;
  for (int a : reps_) total += a;
  return total;
}

double SimulationDataset::sample_variance(int i, int j) const {
  if (reps_[i] < 2) throw std::logic_error("sample_variance: needs reps >= 2");
  return m2_(i, j) / (reps_[i] - 1);
}

int SimulationDataset::find_parameter(const Vector& theta) const {
  for (int i = 0; i < n_unique(); ++i)
    if ((params_.row(i).transpose() - theta).cwiseAbs().maxCoeff() <= kCoincidenceTol)
      return i;
  return -1;
}

int SimulationDataset::add_point(const Vector& theta, const std::vector<Vector>& outs) {
  if (theta.size() != p_) throw std::invalid_argument("add_point: parameter dimension");
  if (outs.empty()) throw std::invalid_argument("add_point: needs at least one replicate");
  if (find_parameter(theta) >= 0)
    throw std::invalid_argument("add_point: parameter already in the design");
  const int i = n_unique();
  params_.conservativeResize(i + 1, p_);
  params_.row(i) = theta.transpose();
  mean_.conservativeResize(i + 1, d_);
  m2_.conservativeResize(i + 1, d_);
  mean_.row(i).setZero();
  m2_.row(i).setZero();
  reps_.push_back(0);
  outputs_.emplace_back();
  add_replicates(i, outs);
  return i;
}

void SimulationDataset::add_replicates(int idx, const std::vector<Vector>& outs) {
  if (idx < 0 || idx >= n_unique()) throw std::invalid_argument("add_replicates: bad index");
  for (const Vector& z : outs) {
    if (z.size() != d_) throw std::invalid_argument("add_replicates: output dimension");
    ++reps_[idx];
    const double a = static_cast<double>(reps_[idx]);
    for (int j = 0; j < d_; ++j) {
      const double delta = z[j] - mean_(idx, j);
      mean_(idx, j) += delta / a;
      m2_(idx, j) += delta * (z[j] - mean_(idx, j));
    }
    outputs_[idx].push_back(z);
  }
}

double SimulationDataset::check_moments() const {
  double worst = 0.0;
  for (int i = 0; i < n_unique(); ++i)
    for (int j = 0; j < d_; ++j) {
      double m = 0.0;
      for (const Vector& z : outputs_[i]) m += z[j];
      m /= reps_[i];
      double ss = 0.0;
      for (const Vector& z : outputs_[i]) ss += (z[j] - m) * (z[j] - m);
      worst = std::max(worst, std::abs(m - mean_(i, j)));
      worst = std::max(worst, std::abs(ss - m2_(i, j)));
    }
  return worst;
}

void SimulationDataset::save(std::ostream& os) const {
  os << "# simulation dataset\n";
  os << "p " << p_ << "\nd " << d_ << "\nn " << n_unique() << "\n";
  os << "# columns: theta[p] replicate output[d]\n";
  os << std::setprecision(17);
  for (int i = 0; i < n_unique(); ++i)
    for (int l = 0; l < reps_[i]; ++l) {
      for (int c = 0; c < p_; ++c) os << params_(i, c) << ' ';
      os << l;
      for (int j = 0; j < d_; ++j) os << ' ' << outputs_[i][l][j];
      os << '\n';
    }
}

SimulationDataset SimulationDataset::load(std::istream& is) {
  std::string line;
  int p = -1, d = -1, n = -1;
  auto read_header = [&](const std::string& key, int& out) {
    std::istringstream ls(line);
    std::string k;
    ls >> k >> out;
    if (k != key || !ls) throw std::runtime_error("dataset load: bad header line '" + line + "'");
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (p < 0) { read_header("p", p); continue; }
    if (d < 0) { read_header("d", d); continue; }
    read_header("n", n);
    break;
  }
  if (p < 1 || d < 1 || n < 0) throw std::runtime_error("dataset load: incomplete header");
  SimulationDataset data(p, d);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Vector theta(p);
    for (int c = 0; c < p; ++c) ls >> theta[c];
    int rep = 0;
    ls >> rep;
    Vector z(d);
    for (int j = 0; j < d; ++j) ls >> z[j];
    if (!ls) throw std::runtime_error("dataset load: bad data row '" + line + "'");
    const int idx = data.find_parameter(theta);
    if (idx < 0) data.add_point(theta, {z});
    else data.add_replicates(idx, {z});
  }
  if (data.n_unique() != n) throw std::runtime_error("dataset load: row count mismatch");
  return data;
}

void SimulationDataset::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dataset save: cannot open " + path);
  save(os);
}

SimulationDataset SimulationDataset::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("dataset load: cannot open " + path);
  return load(is);
}

}  // namespace calib
