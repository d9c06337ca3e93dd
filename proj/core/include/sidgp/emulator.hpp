#ifndef SIDGP_EMULATOR_HPP
#define SIDGP_EMULATOR_HPP

#include "sidgp/architecture.hpp"
#include "sidgp/diagnostics.hpp"
#include "sidgp/linked.hpp"
#include "sidgp/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sidgp {

enum class ImputationMode {
  /// Continue the training chain and keep every `thinning`-th sweep.
  SingleChain,
  /// N chains restarted from the final training state with split streams.
  IndependentChains,
};

std::string_view to_string(ImputationMode mode);
ImputationMode imputation_mode_from_string(std::string_view name);

struct EmulatorConfig {
  TrainingConfig training{};
  /// Number of latent imputations N mixed at prediction time.
  int imputations = 50;
  ImputationMode mode = ImputationMode::SingleChain;
  int thinning = 10;

  void validate() const;
  bool operator==(const EmulatorConfig&) const = default;
};

/// A trained deep GP: averaged hyperparameters plus N latent imputations,
/// each of which turns the network into a linked GP.
struct TrainedEmulator {
  Architecture architecture;
  TrainingData data;
  NetworkParams params;
  std::vector<LatentState> imputations;
  EmulatorConfig config;
  std::uint64_t seed = 0;
  std::string data_digest;

  /// One conditioned network per imputation; derived from the fields above
  /// by rebuild().
  std::vector<LinkedNetwork> networks;

  void rebuild();
  /// Field-wise equality, excluding the derived networks.
  bool operator==(const TrainedEmulator& o) const;
};

struct TrainTimings {
  double train_seconds = 0.0;
  double impute_seconds = 0.0;
};

TrainedEmulator train(const TrainingData& data, const Architecture& arch,
                      const EmulatorConfig& config,
                      const ProgressCallback& progress = {},
                      Diagnostics* diag = nullptr, TrainTimings* timings = nullptr);

/// Predictive moments per test row (rows) and output (columns). When
/// requested, the per-imputation moments are kept as well.
struct PredictionResult {
  Matrix mean;
  Matrix variance;
  std::vector<Matrix> component_mean;
  std::vector<Matrix> component_variance;
};

struct PredictOptions {
  bool keep_components = false;
  int threads = 1;
};

/// Mixture of the N linked-GP predictions: the mean of the component means,
/// and the mean of the component variances plus the spread of the means.
PredictionResult predict(const TrainedEmulator& model, const Matrix& x0,
                         const PredictOptions& options = {},
                         Diagnostics* diag = nullptr);

/// Mixture moments of N Gaussian components, computed with compensated sums.
GaussianBelief mix_components(std::span<const GaussianBelief> components);

}  // namespace sidgp

#endif  // SIDGP_EMULATOR_HPP
