#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "calib/experiment.hpp"

using namespace calib;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.simulator = "unimodal";
  cfg.n0 = 8;
  cfg.reps0 = 2;
  cfg.b = 4;
  cfg.t_b = 2;
  cfg.a_breve = 2;
  cfg.candidates = 20;
  cfg.ref = "grid:8";
  cfg.fit_restarts = 2;
  cfg.fit_max_iterations = 60;
  cfg.seed = 31;
  cfg.outdir = "/tmp/calib_test_run";
  return cfg;
}

}  // namespace

TEST_CASE("config round trip and validation") {
  ExperimentConfig cfg = small_config();
  cfg.simulator_overrides["horizon_days"] = "60";
  std::stringstream ss;
  cfg.save(ss);
  const ExperimentConfig back = ExperimentConfig::load(ss);
  CHECK(back.simulator == cfg.simulator);
  CHECK(back.n0 == cfg.n0);
  CHECK(back.b == cfg.b);
  CHECK(back.seed == cfg.seed);
  CHECK(back.ref == cfg.ref);
  CHECK(back.simulator_overrides.at("horizon_days") == "60");

  ExperimentConfig bad = small_config();
  bad.a_breve = 3;  // does not divide b
  CHECK_THROWS(bad.validate());
  std::stringstream junk("nonsense 12\n");
  CHECK_THROWS(ExperimentConfig::load(junk));

  CHECK(cfg.effective_b_breve() == 2);
  CHECK(cfg.effective_candidates(2) == 20);
  ExperimentConfig defaults;
  CHECK(defaults.effective_candidates(7) == 500);
  CHECK(defaults.effective_ref(2) == "grid:50");
  CHECK(defaults.effective_ref(7) == "lhs:2500");
}

TEST_CASE("prepared inputs are deterministic and shaped") {
  const ExperimentConfig cfg = small_config();
  const ExperimentInputs a = prepare_inputs(cfg, 0);
  const ExperimentInputs b = prepare_inputs(cfg, 0);
  CHECK(a.obs.y == b.obs.y);
  CHECK((a.init.params() - b.init.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.truth - b.truth).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.ref.rows() == 64);
  CHECK(a.init.n_unique() == 8);
  CHECK(a.init.total_evals() == 16);

  // replicates share the reference set and expected-output table but draw
  // fresh observed data, so their posterior truth tables differ
  const ExperimentInputs c = prepare_inputs(cfg, 1);
  CHECK((a.ref - c.ref).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.eta_ref - c.eta_ref).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.obs.y != c.obs.y);
  CHECK((a.truth - c.truth).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("epidemic truth tables stabilize as replication doubles") {
  ExperimentConfig cfg;
  cfg.simulator = "sir";
  cfg.simulator_overrides["horizon_days"] = "40";
  cfg.ref = "grid:4";
  const SimulatorSpec spec = make_simulator(cfg.simulator, cfg.simulator_overrides);
  RngStream ref_rng(1, 0, 0);
  const Matrix ref = corner_grid(4, 2);

  const int n_reps = 150;
  const Matrix eta_a = expected_outputs_at(spec, ref, n_reps, 11);
  const Matrix eta_b = expected_outputs_at(spec, ref, 2 * n_reps, 12);

  RngStream obs_rng(3, 0, 0);
  const ObservedData od = generate_observed_data(spec, std::nullopt, obs_rng, 400);
  const ObservationModel obs = ObservationModel::make_diag(od.y, od.sigma_diag);
  const Vector table_a = true_posterior_table(eta_a, obs, ref);
  const Vector table_b = true_posterior_table(eta_b, obs, ref);

  // empirical spread of the table from five independent seeds
  Matrix spread(ref.rows(), 5);
  for (int k = 0; k < 5; ++k)
    spread.col(k) =
        true_posterior_table(expected_outputs_at(spec, ref, n_reps, 100 + k), obs, ref);
  int violations = 0;
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const double mean = spread.row(i).mean();
    const double sd =
        std::sqrt((spread.row(i).array() - mean).square().sum() / 4.0);
    const double pooled = std::sqrt(sd * sd + sd * sd / 2.0) + 1e-300;
    if (std::abs(table_a[i] - table_b[i]) >= 3.0 * pooled) ++violations;
  }
  CHECK(violations <= 2);
}

TEST_CASE("fit-only smoke run returns the initial record") {
  ExperimentConfig cfg = small_config();
  cfg.t_b = 0;
  const ExperimentResult res = run_experiment(cfg, prepare_inputs(cfg, 0), 0, "");
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].stage == 0);
  CHECK(res.records[0].strategy == "init");
  CHECK(res.records[0].cumulative_evals == 16);
  CHECK(std::isfinite(res.records[0].mad_value));
  CHECK(std::isnan(res.records[0].interval_scores[0]));
}

TEST_CASE("experiment bookkeeping across methods") {
  for (const Method m : {Method::ivar, Method::var, Method::imse, Method::unif}) {
    ExperimentConfig cfg = small_config();
    cfg.method = m;
    const ExperimentResult res = run_experiment(cfg, prepare_inputs(cfg, 0), 0, "");
    REQUIRE(res.records.size() == 3);
    for (int t = 0; t <= 2; ++t) {
      CHECK(res.records[t].cumulative_evals == 16 + 4 * t);
      CHECK(std::isfinite(res.records[t].mad_value));
    }
    CHECK(res.dataset.total_evals() == 24);
    if (m == Method::unif) {
      CHECK(res.records[1].strategy == "unif");
    } else {
      CHECK((res.records[1].strategy == "replication" ||
             res.records[1].strategy == "exploration"));
      CHECK(std::isfinite(res.records[1].variance_replication));
      CHECK(std::isfinite(res.records[1].variance_exploration));
    }
    // acquisitions exist, so interval scores are defined
    CHECK(std::isfinite(res.records[2].interval_scores[0]));
  }
}

TEST_CASE("persistence, replay, and score") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/calib_test_persist";
  fs::remove_all(dir);
  ExperimentConfig cfg = small_config();
  cfg.outdir = dir;
  const ExperimentInputs inputs = prepare_inputs(cfg, 0);
  const ExperimentResult res = run_experiment(cfg, inputs, 0, dir, true);

  CHECK(fs::exists(dir + "/config.txt"));
  CHECK(fs::exists(dir + "/manifest.txt"));
  CHECK(fs::exists(dir + "/stages.txt"));
  CHECK(fs::exists(dir + "/trace.txt"));
  CHECK(fs::exists(dir + "/dataset.txt"));
  CHECK(fs::exists(dir + "/model.txt"));
  CHECK(fs::exists(dir + "/posterior.txt"));

  SUBCASE("replay reproduces every record") {
    std::ostringstream log;
    CHECK(replay_experiment(dir, log));
  }
  SUBCASE("replay flags tampering") {
    // perturb one digit of the mad column in the last record
    std::ifstream is(dir + "/stages.txt");
    std::stringstream buf;
    buf << is.rdbuf();
    std::string text = buf.str();
    const auto pos = text.find_last_of('\n', text.size() - 2);
    std::string last = text.substr(pos + 1);
    const auto sp = last.find(' ', last.find(' ') + 1);
    last[sp + 3] = last[sp + 3] == '5' ? '6' : '5';
    std::ofstream os(dir + "/stages.txt", std::ios::trunc);
    os << text.substr(0, pos + 1) << last;
    os.close();
    std::ostringstream log;
    CHECK(!replay_experiment(dir, log));
    // restore for other subcases
    std::ofstream restore(dir + "/stages.txt", std::ios::trunc);
    restore << text;
  }
  SUBCASE("score recomputes the final metrics from the snapshot") {
    std::ostringstream log;
    score_experiment(dir, log);
    const std::string out = log.str();
    CHECK(out.find("final_mad") != std::string::npos);
    std::istringstream ls(out);
    std::string key;
    double value = -1.0;
    ls >> key >> value;
    REQUIRE(key == "final_mad");
    CHECK(value == doctest::Approx(res.records.back().mad_value).epsilon(1e-12));
  }
}

TEST_CASE("bench shares draws within a replicate and honors the budget") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/calib_test_bench";
  fs::remove_all(dir);
  ExperimentConfig cfg = small_config();
  cfg.outdir = dir;
  cfg.replicates = 1;
  std::ostringstream log;
  run_bench(cfg, {Method::ivar, Method::unif}, {4}, log);
  CHECK(fs::exists(dir + "/ivar_b4_rep0/stages.txt"));
  CHECK(fs::exists(dir + "/unif_b4_rep0/stages.txt"));

  // same observed data across methods within the replicate
  auto read_y = [&](const std::string& sub) {
    std::ifstream is(dir + sub + "/manifest.txt");
    std::string line;
    while (std::getline(is, line))
      if (line.rfind("y ", 0) == 0) return line;
    return std::string();
  };
  CHECK(read_y("/ivar_b4_rep0") == read_y("/unif_b4_rep0"));
  CHECK(log.str().find("ivar b=4 rep=0") != std::string::npos);

  CHECK_THROWS(run_bench(cfg, {Method::ivar}, {3}, log));  // budget not divisible
}
