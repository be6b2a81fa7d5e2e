#include "calib/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "calib/parallel.hpp"

namespace calib {

namespace {

enum Purpose : std::uint64_t {
  kObserved = 1,
  kInit = 2,
  kTruth = 3,
  kCandidates = 4,
  kReference = 5,
  kEval = 6,
  kFit = 7,
  kUnif = 8,
};

std::uint64_t skey(std::uint64_t purpose, std::uint64_t replicate, std::uint64_t stage) {
  return (purpose << 48) ^ (replicate << 24) ^ stage;
}

Vector parse_number_list(const std::string& text) {
  std::vector<double> vals;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) vals.push_back(std::stod(token));
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// one simulation task within a stage batch
struct EvalTask {
  Vector theta;
  int dataset_index;  // existing design point, or -1 for a new parameter
};

std::vector<Vector> evaluate_tasks(const SimulatorSpec& spec, const std::vector<EvalTask>& tasks,
                                   std::uint64_t seed, std::uint64_t key) {
  std::vector<Vector> results(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int slot) {
    RngStream rng(seed, key, static_cast<std::uint64_t>(slot));
    results[slot] = simulate(spec, tasks[slot].theta, rng).values;
  });
  return results;
}

double mean_variance(const PosteriorField& field) {
  std::vector<double> v(field.variance.data(), field.variance.data() + field.variance.size());
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

std::string StageRecord::header(int p) {
  std::string h = "# stage strategy mad";
  for (int l = 0; l < p; ++l) h += " interval_score" + std::to_string(l + 1);
  h += " integrated_variance variance_replication variance_exploration cumulative_evals"
       " seconds";
  return h;
}

std::string StageRecord::to_line() const {
  std::ostringstream ss;
  ss << std::setprecision(17);
  ss << stage << ' ' << strategy << ' ' << mad_value;
  for (Eigen::Index l = 0; l < interval_scores.size(); ++l) ss << ' ' << interval_scores[l];
  ss << ' ' << integrated_variance << ' ' << variance_replication << ' '
     << variance_exploration << ' ' << cumulative_evals << ' ' << acquisition_seconds;
  return ss.str();
}

Matrix expected_outputs_at(const SimulatorSpec& spec, const Matrix& ref, int n_reps,
                           std::uint64_t seed) {
  Matrix eta(ref.rows(), spec.d);
  if (spec.has_closed_form) {
    for (Eigen::Index i = 0; i < ref.rows(); ++i)
      eta.row(i) = expected_output(spec, ref.row(i).transpose()).transpose();
    return eta;
  }
  parallel_for(static_cast<int>(ref.rows()), [&](int i) {
    RngStream rng(seed, skey(kTruth, 0, 0), static_cast<std::uint64_t>(i));
    Vector acc = Vector::Zero(spec.d);
    for (int r = 0; r < n_reps; ++r)
      acc += simulate(spec, ref.row(i).transpose(), rng).values;
    eta.row(i) = (acc / n_reps).transpose();
  });
  return eta;
}

Vector true_posterior_table(const Matrix& eta_ref, const ObservationModel& obs,
                            const Matrix& ref) {
  Vector truth(ref.rows());
  for (Eigen::Index i = 0; i < ref.rows(); ++i)
    truth[i] = true_unnormalized_posterior(eta_ref.row(i).transpose(), obs,
                                           ref.row(i).transpose());
  return truth;
}

ExperimentInputs prepare_inputs(const ExperimentConfig& cfg, int replicate) {
  cfg.validate();
  ExperimentInputs in;
  in.spec = make_simulator(cfg.simulator, cfg.simulator_overrides);

  std::optional<Vector> sigma_override;
  if (!cfg.sigma.empty()) sigma_override = parse_number_list(cfg.sigma);

  RngStream obs_rng(cfg.seed, skey(kObserved, replicate, 0), 0);
  const ObservedData od =
      generate_observed_data(in.spec, sigma_override, obs_rng, cfg.obs_mean_reps);
  in.obs = ObservationModel::make_diag(od.y, od.sigma_diag);

  RngStream ref_rng(cfg.seed, skey(kReference, 0, 0), 0);
  in.ref = make_reference_set(ReferenceSpec::parse(cfg.effective_ref(in.spec.p)),
                              in.spec.p, ref_rng);
  in.eta_ref = expected_outputs_at(in.spec, in.ref, cfg.truth_reps, cfg.seed);
  in.truth = true_posterior_table(in.eta_ref, in.obs, in.ref);
  Eigen::Index best = 0;
  in.truth.maxCoeff(&best);
  in.theta_mle = in.ref.row(best).transpose();

  RngStream init_rng(cfg.seed, skey(kInit, replicate, 0), 0);
  const Matrix X0 = latin_hypercube(cfg.n0, in.spec.p, init_rng);
  std::vector<EvalTask> tasks;
  for (int i = 0; i < cfg.n0; ++i)
    for (int l = 0; l < cfg.reps0; ++l)
      tasks.push_back({X0.row(i).transpose(), i});
  const std::vector<Vector> outs =
      evaluate_tasks(in.spec, tasks, cfg.seed, skey(kEval, replicate, 0));
  in.init = SimulationDataset(in.spec.p, in.spec.d);
  for (int i = 0; i < cfg.n0; ++i) {
    std::vector<Vector> reps;
    for (int l = 0; l < cfg.reps0; ++l) reps.push_back(outs[i * cfg.reps0 + l]);
    in.init.add_point(X0.row(i).transpose(), reps);
  }
  return in;
}

namespace {

struct TraceStage {
  int stage;
  std::string strategy;
  double variance_replication;
  double variance_exploration;
  double seconds;
  Matrix batch_params;  // rows: parameter coords
  std::vector<int> batch_reps;
};

void write_trace(std::ostream& os, const TraceStage& ts) {
  os << std::setprecision(17);
  os << "stage " << ts.stage << "\n";
  os << "strategy " << ts.strategy << "\n";
  os << "variance_replication " << ts.variance_replication << "\n";
  os << "variance_exploration " << ts.variance_exploration << "\n";
  os << "seconds " << ts.seconds << "\n";
  os << "batch " << ts.batch_params.rows() << "\n";
  for (Eigen::Index r = 0; r < ts.batch_params.rows(); ++r) {
    for (Eigen::Index c = 0; c < ts.batch_params.cols(); ++c) os << ts.batch_params(r, c) << ' ';
    os << ts.batch_reps[r] << "\n";
  }
  os << "end\n";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& inputs,
                                int replicate, const std::string& outdir,
                                bool dump_posterior) {
  cfg.validate();
  const SimulatorSpec& spec = inputs.spec;
  const ObservationModel& obs = inputs.obs;
  const Matrix& ref = inputs.ref;
  const int p = spec.p;

  ExperimentResult result;
  result.dataset = inputs.init;
  SimulationDataset& data = result.dataset;

  std::vector<std::vector<double>> acquired(p);  // per-evaluation parameter values
  std::vector<TraceStage> trace;

  std::vector<CoordinateHyperparams> warm;
  auto fit_stage = [&](int stage) {
    FitConfig fc;
    fc.allow_no_replication = true;
    fc.max_iterations = cfg.fit_max_iterations;
    fc.seed = mix64(cfg.seed ^ skey(kFit, replicate, stage));
    const bool use_warm = cfg.warm_start && !warm.empty();
    fc.restarts = use_warm ? 1 : cfg.fit_restarts;
    try {
      return fit_het_gp(data, fc, use_warm ? &warm : nullptr);
    } catch (const std::exception&) {
      fc.restarts = cfg.fit_restarts + 2;
      fc.seed = mix64(fc.seed ^ 0x927EULL);
      return fit_het_gp(data, fc, nullptr);
    }
  };

  auto make_record = [&](int stage, const std::string& strategy, double var_rep,
                         double var_exp, double secs, const HetGpModel& model) {
    const PosteriorField field = evaluate_posterior_field(model, obs, ref);
    StageRecord rec;
    rec.stage = stage;
    rec.strategy = strategy;
    rec.mad_value = mad(field.mean, inputs.truth);
    rec.integrated_variance = mean_variance(field);
    rec.interval_scores.resize(p);
    for (int l = 0; l < p; ++l)
      rec.interval_scores[l] =
          acquired[l].empty()
              ? std::numeric_limits<double>::quiet_NaN()
              : interval_score(acquired[l], inputs.theta_mle[l], 0.10);
    rec.variance_replication = var_rep;
    rec.variance_exploration = var_exp;
    rec.cumulative_evals = data.total_evals();
    rec.acquisition_seconds = secs;
    return rec;
  };

  // pre-drawn uniform design, consumed stage by stage
  std::vector<EvalTask> unif_queue;
  if (cfg.method == Method::unif) {
    const long total = static_cast<long>(cfg.t_b) * cfg.b;
    const int n_points = static_cast<int>((total + 3) / 4);
    RngStream unif_rng(cfg.seed, skey(kUnif, replicate, 0), 0);
    const Matrix pts = latin_hypercube(n_points, p, unif_rng);
    long remaining = total;
    for (int i = 0; i < n_points && remaining > 0; ++i) {
      const int reps_here = static_cast<int>(std::min<long>(4, remaining));
      for (int l = 0; l < reps_here; ++l) unif_queue.push_back({pts.row(i).transpose(), -1});
      remaining -= reps_here;
    }
  }

  HetGpModel model = fit_stage(0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.records.push_back(make_record(0, "init", nan, nan, 0.0, model));

  for (int t = 1; t <= cfg.t_b; ++t) {
    const auto tic = std::chrono::steady_clock::now();
    std::vector<EvalTask> tasks;
    TraceStage ts;
    ts.stage = t;
    double var_rep = nan, var_exp = nan;

    if (cfg.method == Method::unif) {
      ts.strategy = "unif";
      for (int s = 0; s < cfg.b; ++s) tasks.push_back(unif_queue[(t - 1) * cfg.b + s]);
    } else {
      ReplicationAllocation rep_alloc =
          cfg.method == Method::imse ? imse_replication_batch(model, ref, cfg.b)
                                     : ivar_replication_batch(model, obs, ref, cfg.b);
      const ExplorationCriterion crit = cfg.method == Method::ivar
                                            ? ExplorationCriterion::ivar
                                            : cfg.method == Method::imse
                                                  ? ExplorationCriterion::imse
                                                  : ExplorationCriterion::var;
      RngStream cand_rng(cfg.seed, skey(kCandidates, replicate, t), 0);
      ExplorationBatch exp_batch =
          build_exploration_batch(model, obs, ref, crit, cfg.effective_b_breve(),
                                  cfg.a_breve, cfg.effective_candidates(p), cand_rng);
      AcquisitionBatch chosen = select_strategy(model, obs, ref, std::move(rep_alloc),
                                                std::move(exp_batch));
      var_rep = chosen.variance_replication;
      var_exp = chosen.variance_exploration;
      if (chosen.strategy == AcquisitionBatch::Strategy::replication) {
        ts.strategy = "replication";
        for (int i = 0; i < data.n_unique(); ++i)
          for (int l = 0; l < chosen.replication.delta[i]; ++l)
            tasks.push_back({data.params().row(i).transpose(), i});
      } else {
        ts.strategy = "exploration";
        for (Eigen::Index r = 0; r < chosen.exploration.new_params.rows(); ++r)
          for (int l = 0; l < chosen.exploration.reps_each; ++l)
            tasks.push_back({chosen.exploration.new_params.row(r).transpose(), -1});
      }
    }
    if (static_cast<int>(tasks.size()) != cfg.b)
      throw std::logic_error("run_experiment: stage batch does not total b");
    const auto toc = std::chrono::steady_clock::now();
    ts.seconds = std::chrono::duration<double>(toc - tic).count();
    ts.variance_replication = var_rep;
    ts.variance_exploration = var_exp;

    const std::vector<Vector> outs =
        evaluate_tasks(spec, tasks, cfg.seed, skey(kEval, replicate, t));
    for (std::size_t s = 0; s < tasks.size(); ++s) {
      const int idx = tasks[s].dataset_index >= 0 ? tasks[s].dataset_index
                                                  : data.find_parameter(tasks[s].theta);
      if (idx >= 0) data.add_replicates(idx, {outs[s]});
      else data.add_point(tasks[s].theta, {outs[s]});
      for (int l = 0; l < p; ++l) acquired[l].push_back(tasks[s].theta[l]);
    }

    // batch summary for the trace: unique parameters with their eval counts
    {
      std::vector<std::pair<Vector, int>> grouped;
      for (const EvalTask& task : tasks) {
        bool found = false;
        for (auto& [theta, count] : grouped)
          if ((theta - task.theta).cwiseAbs().maxCoeff() <= kCoincidenceTol) {
            ++count;
            found = true;
            break;
          }
        if (!found) grouped.emplace_back(task.theta, 1);
      }
      ts.batch_params.resize(static_cast<Eigen::Index>(grouped.size()), p);
      ts.batch_reps.resize(grouped.size());
      for (std::size_t g = 0; g < grouped.size(); ++g) {
        ts.batch_params.row(static_cast<Eigen::Index>(g)) = grouped[g].first.transpose();
        ts.batch_reps[g] = grouped[g].second;
      }
    }
    trace.push_back(ts);

    warm.clear();
    for (int j = 0; j < model.output_dim(); ++j) warm.push_back(model.coord(j).hp);
    model = fit_stage(t);
    result.records.push_back(make_record(t, ts.strategy, var_rep, var_exp, ts.seconds, model));

    const long expected = static_cast<long>(cfg.n0) * cfg.reps0 + static_cast<long>(t) * cfg.b;
    if (data.total_evals() != expected)
      throw std::logic_error("run_experiment: evaluation accounting drifted");
  }
  result.model = std::move(model);

  if (!outdir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    {
      std::ofstream os(outdir + "/config.txt");
      cfg.save(os);
    }
    {
      std::ofstream os(outdir + "/manifest.txt");
      os << std::setprecision(17);
      os << "# experiment manifest\n";
      os << "version calib-0.1.0\n";
      os << "replicate " << replicate << "\n";
      os << "seed " << cfg.seed << "\n";
      os << "p " << p << "\nd " << spec.d << "\n";
      os << "y";
      for (int j = 0; j < spec.d; ++j) os << ' ' << obs.y[j];
      os << "\nsigma_diag";
      for (int j = 0; j < spec.d; ++j) os << ' ' << obs.sigma_diag[j];
      os << "\ntheta_mle";
      for (int l = 0; l < p; ++l) os << ' ' << inputs.theta_mle[l];
      os << "\n";
    }
    {
      std::ofstream os(outdir + "/stages.txt");
      os << StageRecord::header(p) << "\n";
      for (const StageRecord& rec : result.records) os << rec.to_line() << "\n";
    }
    {
      std::ofstream os(outdir + "/trace.txt");
      for (const TraceStage& ts : trace) write_trace(os, ts);
    }
    result.dataset.save_file(outdir + "/dataset.txt");
    {
      std::ofstream os(outdir + "/model.txt");
      result.model.save(os);
    }
    if (dump_posterior) {
      std::ofstream os(outdir + "/posterior.txt");
      evaluate_posterior_field(result.model, obs, ref).save(os);
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool dump_posterior) {
  const ExperimentInputs inputs = prepare_inputs(cfg, 0);
  return run_experiment(cfg, inputs, 0, cfg.outdir, dump_posterior);
}

void run_bench(const ExperimentConfig& cfg, const std::vector<Method>& methods,
               const std::vector<int>& batch_sizes, std::ostream& log) {
  const long budget = static_cast<long>(cfg.t_b) * cfg.b;
  for (int b : batch_sizes)
    if (budget % b != 0)
      throw std::invalid_argument("bench: total budget must be divisible by every batch size");
  for (int r = 0; r < cfg.replicates; ++r) {
    const ExperimentInputs inputs = prepare_inputs(cfg, r);
    for (int b : batch_sizes) {
      for (Method m : methods) {
        ExperimentConfig run_cfg = cfg;
        run_cfg.method = m;
        run_cfg.b = b;
        run_cfg.t_b = static_cast<int>(budget / b);
        run_cfg.b_breve = 0;
        const std::string dir = cfg.outdir + "/" + method_name(m) + "_b" +
                                std::to_string(b) + "_rep" + std::to_string(r);
        const ExperimentResult res = run_experiment(run_cfg, inputs, r, dir);
        log << method_name(m) << " b=" << b << " rep=" << r
            << " final_mad=" << res.records.back().mad_value
            << " evals=" << res.records.back().cumulative_evals << "\n";
      }
    }
  }
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

std::string strip_seconds_column(const std::string& line) {
  const auto pos = line.find_last_of(' ');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::map<std::string, std::string> kv;
  for (const std::string& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) continue;
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return kv;
}

Vector parse_space_list(const std::string& text) {
  std::vector<double> vals;
  std::istringstream ss(text);
  double v;
  while (ss >> v) vals.push_back(v);
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

bool replay_experiment(const std::string& dir, std::ostream& log) {
  const ExperimentConfig cfg = ExperimentConfig::load_file(dir + "/config.txt");
  const auto manifest = read_manifest(dir + "/manifest.txt");
  const int replicate = std::stoi(manifest.at("replicate"));
  const ExperimentInputs inputs = prepare_inputs(cfg, replicate);
  const ExperimentResult res = run_experiment(cfg, inputs, replicate, "");

  const std::vector<std::string> persisted = read_lines(dir + "/stages.txt");
  std::vector<std::string> fresh;
  fresh.push_back(StageRecord::header(inputs.spec.p));
  for (const StageRecord& rec : res.records) fresh.push_back(rec.to_line());
  if (persisted.size() != fresh.size()) {
    log << "replay: record count differs (" << persisted.size() << " vs " << fresh.size()
        << ")\n";
    return false;
  }
  bool ok = true;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    // wall-clock seconds is the only nondeterministic field
    if (strip_seconds_column(persisted[i]) != strip_seconds_column(fresh[i])) {
      log << "replay: record " << i << " differs\n  old: " << persisted[i]
          << "\n  new: " << fresh[i] << "\n";
      ok = false;
    }
  }
  log << (ok ? "replay: all records identical\n" : "replay: MISMATCH\n");
  return ok;
}

void score_experiment(const std::string& dir, std::ostream& log) {
  const ExperimentConfig cfg = ExperimentConfig::load_file(dir + "/config.txt");
  const auto manifest = read_manifest(dir + "/manifest.txt");
  const SimulationDataset data = SimulationDataset::load_file(dir + "/dataset.txt");
  std::ifstream model_is(dir + "/model.txt");
  const HetGpModel model = HetGpModel::load(data, model_is);
  const ObservationModel obs = ObservationModel::make_diag(
      parse_space_list(manifest.at("y")), parse_space_list(manifest.at("sigma_diag")));
  const Vector theta_mle = parse_space_list(manifest.at("theta_mle"));

  const SimulatorSpec spec = make_simulator(cfg.simulator, cfg.simulator_overrides);
  RngStream ref_rng(cfg.seed, skey(kReference, 0, 0), 0);
  const Matrix ref = make_reference_set(ReferenceSpec::parse(cfg.effective_ref(spec.p)),
                                        spec.p, ref_rng);
  const Matrix eta_ref = expected_outputs_at(spec, ref, cfg.truth_reps, cfg.seed);
  const Vector truth = true_posterior_table(eta_ref, obs, ref);

  const PosteriorField field = evaluate_posterior_field(model, obs, ref);
  log << std::setprecision(17);
  log << "final_mad " << mad(field.mean, truth) << "\n";
  log << "integrated_variance " << mean_variance(field) << "\n";

  // acquired parameters from the trace, weighted by evaluation count
  std::vector<std::vector<double>> acquired(spec.p);
  {
    std::ifstream is(dir + "/trace.txt");
    std::string line;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key != "batch") continue;
      int rows;
      ls >> rows;
      for (int rrow = 0; rrow < rows; ++rrow) {
        std::getline(is, line);
        std::istringstream rs(line);
        Vector theta(spec.p);
        for (int l = 0; l < spec.p; ++l) rs >> theta[l];
        int count;
        rs >> count;
        for (int c = 0; c < count; ++c)
          for (int l = 0; l < spec.p; ++l) acquired[l].push_back(theta[l]);
      }
    }
  }
  for (int l = 0; l < spec.p; ++l) {
    if (acquired[l].empty()) continue;
    log << "interval_score" << l + 1 << " "
        << interval_score(acquired[l], theta_mle[l], 0.10) << "\n";
  }
}

}  // namespace calib
