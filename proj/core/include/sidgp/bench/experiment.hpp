#ifndef SIDGP_BENCH_EXPERIMENT_HPP
#define SIDGP_BENCH_EXPERIMENT_HPP

#include "sidgp/diagnostics.hpp"
#include "sidgp/emulator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sidgp::bench {

struct ExperimentConfig {
  /// "step", "synth5d" or "csv".
  std::string name = "step";
  /// Nodes per layer; empty picks the experiment default.
  std::vector<int> layers;
  std::optional<bool> input_connected;
  std::optional<bool> shared_range;
  EmulatorConfig emulator{};
  /// Training / test sizes for the built-in problems; 0 picks the default.
  Eigen::Index train_size = 0;
  Eigen::Index test_size = 0;
  /// Seed of random designs (synth5d); unset uses the training seed.
  std::optional<std::uint64_t> design_seed;
  int threads = 1;
  bool run_control = true;
  bool record_timings = true;
  std::filesystem::path x, y, test_x, test_y;
  /// Where report.json and the plot CSVs go; empty writes nothing.
  std::filesystem::path out_dir;
};

struct PhaseTimings {
  double train = 0.0;
  double impute = 0.0;
  double predict = 0.0;
};

struct ArmResult {
  std::string label;
  Architecture architecture;
  TrainedEmulator model;
  PredictionResult prediction;
  /// NRMSEP per output column.
  std::vector<double> nrmsep;
  PhaseTimings timings;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> output_names;
  Matrix train_x;
  Matrix train_y;
  Matrix test_x;
  Matrix truth;
  ArmResult dgp;
  /// Single-layer GP fitted to the same data.
  std::optional<ArmResult> control;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

/// Builds the design, trains the deep GP (and the GP control), predicts on
/// the test set and scores it. Failures are rethrown with the phase name.
/// Keeps per-imputation moments when `keep_components`.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                bool keep_components = false);

/// {nrmsep, timings_s, config, seed, warnings, control, notes}.
std::string report_to_json(const ExperimentReport& report);

/// Rebuilds the configuration echoed in a report.
ExperimentConfig experiment_config_from_json(const std::string& report_json);

/// Rows of x..., truth, mean, sd for one output of one arm.
Matrix plot_data(const ExperimentReport& report, const ArmResult& arm, Eigen::Index output);
std::vector<std::string> plot_header(const ExperimentReport& report);

/// report.json plus plot_<arm>.csv (per output) into config.out_dir.
void write_report(const ExperimentReport& report);

}  // namespace sidgp::bench

#endif  // SIDGP_BENCH_EXPERIMENT_HPP
