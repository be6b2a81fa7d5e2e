#pragma once

#include "calib/acquisition.hpp"
#include "calib/config.hpp"
#include "calib/design.hpp"
#include "calib/metrics.hpp"
#include "calib/simulators.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace calib {

struct StageRecord {
  int stage = 0;
  std::string strategy;  // init | replication | exploration | unif
  double mad_value = 0.0;
  Vector interval_scores;  // per parameter dimension; NaN before acquisitions
  double integrated_variance = 0.0;
  double variance_replication = 0.0;
  double variance_exploration = 0.0;
  long cumulative_evals = 0;
  double acquisition_seconds = 0.0;  // excluded from replay comparison

  std::string to_line() const;
  static std::string header(int p);
};

/// Everything an experiment consumes that is shared across methods within a
/// benchmark replicate: the observed-data draw, initial design, reference set
/// and the true-posterior table.
struct ExperimentInputs {
  SimulatorSpec spec;
  ObservationModel obs;
  SimulationDataset init{1, 1};
  Matrix ref;
  Matrix eta_ref;    // expected outputs over ref
  Vector truth;      // true unnormalized posterior over ref
  Vector theta_mle;  // argmax of truth over ref (theta* stand-in for scoring)
};

/// Expected simulation outputs at every row of ref: closed form when the
/// simulator has one, otherwise the average of n_reps seeded runs per point.
Matrix expected_outputs_at(const SimulatorSpec& spec, const Matrix& ref, int n_reps,
                           std::uint64_t seed);

Vector true_posterior_table(const Matrix& eta_ref, const ObservationModel& obs,
                            const Matrix& ref);

ExperimentInputs prepare_inputs(const ExperimentConfig& cfg, int replicate = 0);

struct ExperimentResult {
  std::vector<StageRecord> records;
  SimulationDataset dataset{1, 1};
  HetGpModel model;
};

/// Runs the batch-sequential loop on prepared inputs. When outdir is
/// nonempty, persists config, manifest, stage records, acquisition trace,
/// final dataset and model snapshot (plus the posterior field when
/// dump_posterior is set).
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& inputs,
                                int replicate, const std::string& outdir,
                                bool dump_posterior = false);

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool dump_posterior = false);

/// methods x batch_sizes x replicates cross product; the total budget
/// cfg.t_b * cfg.b is held fixed, so each batch size runs its own stage
/// count. Observed data and initial design are shared across methods within
/// each replicate.
void run_bench(const ExperimentConfig& cfg, const std::vector<Method>& methods,
               const std::vector<int>& batch_sizes, std::ostream& log);

/// Re-executes a persisted experiment and compares the deterministic record
/// fields; true when every record matches bit-for-bit.
bool replay_experiment(const std::string& dir, std::ostream& log);

/// Recomputes metrics from the persisted dataset + model snapshot.
void score_experiment(const std::string& dir, std::ostream& log);

}  // namespace calib
