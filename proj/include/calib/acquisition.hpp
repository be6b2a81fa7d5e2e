#pragma once

#include "calib/hetgp.hpp"
#include "calib/posterior.hpp"
#include "calib/rng.hpp"

namespace calib {

struct ReplicationAllocation {
  std::vector<int> delta;  // additional replicates per design point, sums to b
  Vector weights;          // sqrt(C_i) before rounding
  Vector upper_bounds;     // ub_i after the adjustment pass
  bool degenerate_fallback = false;  // every upper bound was zeroed
};

struct ExplorationBatch {
  Matrix new_params;  // b_breve x p
  int reps_each = 0;  // a_breve
  Vector scores;      // criterion value at selection time
};

struct AcquisitionBatch {
  enum class Strategy { replication, exploration };
  Strategy strategy = Strategy::replication;
  ReplicationAllocation replication;
  ExplorationBatch exploration;
  double variance_replication = 0.0;  // integrated posterior variance if applied
  double variance_exploration = 0.0;
};

enum class ExplorationCriterion { ivar, imse, var };

/// Integrated sensitivity C_i of the posterior variance to replicating design
/// point i; the allocation weight is sqrt(C_i). Tiny negatives clamp to zero.
Vector ivar_replication_sensitivities(const HetGpModel& model, const ObservationModel& obs,
                                      const Matrix& ref);

/// Signed d IVAR / d Delta_a_i at Delta_a = 0 (equals -C_i / a_i^2).
Vector ivar_delta_gradient(const HetGpModel& model, const ObservationModel& obs,
                           const Matrix& ref);

Vector ivar_allocation_weights(const HetGpModel& model, const ObservationModel& obs,
                               const Matrix& ref);

/// Emulator-accuracy analogue without the posterior terms.
Vector imse_allocation_weights(const HetGpModel& model, const Matrix& ref);

/// Proportional allocation with the upper-bound adjustment: points whose
/// ideal total falls below their current replicates are zeroed, the batch is
/// re-shared over the survivors, and largest-remainder rounding makes the
/// deltas integral with sum exactly b.
ReplicationAllocation replication_from_weights(const std::vector<int>& reps,
                                               const Vector& weights, int b);

ReplicationAllocation ivar_replication_batch(const HetGpModel& model,
                                             const ObservationModel& obs,
                                             const Matrix& ref, int b);
ReplicationAllocation imse_replication_batch(const HetGpModel& model, const Matrix& ref,
                                             int b);

/// Expected integrated posterior variance after adding a_new replicates at
/// cand, reduced to its candidate-dependent part and negated so that lower is
/// better across all criteria.
double ivar_exploration_score(const HetGpModel& model, const ObservationModel& obs,
                              const Vector& cand, int a_new, const Matrix& ref);

/// The full expected integrated posterior variance (both terms).
double ivar_exploration_criterion(const HetGpModel& model, const ObservationModel& obs,
                                  const Vector& cand, int a_new, const Matrix& ref);

/// Total emulator variance over ref after the hypothetical addition.
double imse_exploration_score(const HetGpModel& model, const Vector& cand, int a_new,
                              const Matrix& ref);

/// Negated posterior variance at cand.
double var_exploration_score(const HetGpModel& model, const ObservationModel& obs,
                             const Vector& cand);

/// Greedy batch construction: each pick rescoring against the model updated
/// with all previous picks, candidates redrawn fresh every iteration, ties
/// broken by lowest candidate index.
ExplorationBatch build_exploration_batch(const HetGpModel& model, const ObservationModel& obs,
                                         const Matrix& ref, ExplorationCriterion criterion,
                                         int b_breve, int a_breve, int n_candidates,
                                         RngStream& rng);

/// Applies the exploration batch to the model as composed fantasy updates.
HetGpModel apply_exploration(const HetGpModel& model, const ExplorationBatch& batch);

/// Picks the strategy with the lower hypothetical integrated posterior
/// variance; ties go to replication.
AcquisitionBatch select_strategy(const HetGpModel& model, const ObservationModel& obs,
                                 const Matrix& ref, ReplicationAllocation replication,
                                 ExplorationBatch exploration);

}  // namespace calib
