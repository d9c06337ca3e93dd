#ifndef SIDGP_TRAINER_HPP
#define SIDGP_TRAINER_HPP

#include "sidgp/architecture.hpp"
#include "sidgp/diagnostics.hpp"
#include "sidgp/fit.hpp"
#include "sidgp/sampler.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace sidgp {

struct TrainingConfig {
  /// Total SEM iterations T; the trail has exactly T snapshots, the first
  /// being the initialization.
  int iterations = 500;
  /// Snapshots discarded before averaging (B).
  int burn_in = 375;
  /// ESS-within-Gibbs sweeps per imputation step (C).
  int ess_sweeps = 10;
  std::uint64_t seed = 0;
  /// Nugget of every node (kept fixed unless refit.estimate_nugget).
  double nugget = 1e-6;
  /// Standard deviation of the noise added to the initial latent state.
  double initial_jitter = 0.01;
  /// Whether hidden-layer variances are estimated or kept at 1.
  bool estimate_hidden_variance = false;

  /// Optimizer settings for the first maximization step, which starts from
  /// heuristic values.
  FitOptions initial_fit{};
  /// Optimizer settings for later steps, warm-started from the previous
  /// snapshot.
  FitOptions refit{.starts = 1};

  /// Consecutive fit failures of one node tolerated before aborting.
  int max_consecutive_failures = 10;

  void validate() const;
  bool operator==(const TrainingConfig&) const = default;
};

/// snapshots[layer][node][t] for t = 0..T-1.
struct ParameterTrail {
  std::vector<std::vector<std::vector<KernelSpec>>> snapshots;

  int length() const;
  NetworkParams at(int t) const;
  void append(const NetworkParams& params);
};

struct IterationProgress {
  int iteration = 0;  // 1..T-1
  int total = 0;      // T
  /// Log marginal likelihood of every node after the maximization step.
  std::vector<std::vector<double>> log_likelihoods;
};

using ProgressCallback = std::function<void(const IterationProgress&)>;

struct TrainingResult {
  NetworkParams last;  // snapshot T
  ParameterTrail trail;
  LatentState final_state;
  SamplerStats sampler_stats;
  std::size_t fit_failures = 0;
};

/// Heuristic starting hyperparameters: ranges from the median pairwise
/// distance of each node's inputs under `state` (1 if that median is 0),
/// variance from the output variance for final-layer nodes and 1 for hidden
/// nodes, the configured nugget.
NetworkParams initialize_params(const Architecture& arch, const TrainingData& data,
                                const LatentState& state, double nugget);

/// Stochastic EM: for t = 1..T-1, draw one latent realization with
/// `ess_sweeps` sweeps under the current parameters, then refit every node
/// on its pseudo-complete data.
TrainingResult sem_train(const Architecture& arch, const TrainingData& data,
                         const TrainingConfig& config,
                         const ProgressCallback& progress = {},
                         Diagnostics* diag = nullptr);

/// Parameter-wise arithmetic mean of the snapshots after the first
/// `burn_in` (raw scale).
NetworkParams average_trail(const ParameterTrail& trail, int burn_in);

}  // namespace sidgp

#endif  // SIDGP_TRAINER_HPP
