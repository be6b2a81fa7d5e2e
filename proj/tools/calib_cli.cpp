#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "calib/experiment.hpp"

namespace {

calib::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::string>& overrides) {
  calib::ExperimentConfig cfg;
  if (!path.empty()) cfg = calib::ExperimentConfig::load_file(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must look like key=value: " + kv);
    cfg.set_key(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::vector<calib::Method> parse_methods(const std::string& text) {
  std::vector<calib::Method> methods;
  std::istringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) methods.push_back(calib::parse_method(token));
  if (methods.empty()) throw std::invalid_argument("no methods given");
  return methods;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(std::stoi(token));
  if (out.empty()) throw std::invalid_argument("no batch sizes given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch sequential experiment design for stochastic simulator calibration"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool dump_posterior = false;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "configuration file");
    cmd->add_option("-s,--set", overrides, "override a config key (key=value)");
  };

  CLI::App* run = app.add_subcommand("run", "execute one experiment");
  add_config_flags(run);
  run->add_flag("--dump-posterior", dump_posterior, "write the final posterior field");

  CLI::App* bench = app.add_subcommand("bench", "methods x batch sizes x replicates");
  add_config_flags(bench);
  std::string methods_text = "ivar,var,imse,unif";
  std::string batches_text;
  bench->add_option("--methods", methods_text, "comma-separated methods");
  bench->add_option("--batches", batches_text, "comma-separated batch sizes");

  CLI::App* truth = app.add_subcommand("truth", "precompute the true posterior table");
  add_config_flags(truth);

  std::string dir;
  CLI::App* score = app.add_subcommand("score", "recompute metrics from a persisted run");
  score->add_option("-d,--dir", dir, "experiment directory")->required();

  CLI::App* replay = app.add_subcommand("replay", "re-execute and verify a persisted run");
  replay->add_option("-d,--dir", dir, "experiment directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const calib::ExperimentConfig cfg = load_config(config_path, overrides);
      const calib::ExperimentResult res = calib::run_experiment(cfg, dump_posterior);
      std::cout << calib::StageRecord::header(res.dataset.param_dim()) << "\n";
      for (const calib::StageRecord& rec : res.records) std::cout << rec.to_line() << "\n";
      if (calib::variance_clamp_count() > 0)
        std::cout << "# negative-variance clamps: " << calib::variance_clamp_count() << "\n";
      std::cout << "wrote " << cfg.outdir << "\n";
    } else if (bench->parsed()) {
      const calib::ExperimentConfig cfg = load_config(config_path, overrides);
      const std::vector<int> batches =
          batches_text.empty() ? std::vector<int>{cfg.b} : parse_ints(batches_text);
      calib::run_bench(cfg, parse_methods(methods_text), batches, std::cout);
    } else if (truth->parsed()) {
      const calib::ExperimentConfig cfg = load_config(config_path, overrides);
      const calib::ExperimentInputs inputs = calib::prepare_inputs(cfg, 0);
      std::filesystem::create_directories(cfg.outdir);
      std::ofstream os(cfg.outdir + "/truth.txt");
      os << "# columns: theta[p] eta[d] posterior\n" << std::setprecision(17);
      for (Eigen::Index i = 0; i < inputs.ref.rows(); ++i) {
        for (Eigen::Index l = 0; l < inputs.ref.cols(); ++l) os << inputs.ref(i, l) << ' ';
        for (Eigen::Index j = 0; j < inputs.eta_ref.cols(); ++j) os << inputs.eta_ref(i, j) << ' ';
        os << inputs.truth[i] << "\n";
      }
      std::cout << "wrote " << cfg.outdir << "/truth.txt\n";
    } else if (score->parsed()) {
      calib::score_experiment(dir, std::cout);
    } else if (replay->parsed()) {
      if (!calib::replay_experiment(dir, std::cout)) return 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const calib::SingularMatrixError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
