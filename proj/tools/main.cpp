// sidgp: train, predict with, benchmark and inspect deep GP emulators.

#include "sidgp/bench/dataset.hpp"
#include "sidgp/bench/experiment.hpp"
#include "sidgp/bench/problems.hpp"
#include "sidgp/emulator.hpp"
#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace sidgp;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumeric = 4 };

struct ModelFlags {
  std::string arch;
  std::optional<int> layers;
  std::optional<int> nodes;
  std::optional<bool> ic;
  std::optional<bool> shared_range;
  int iterations = 500;
  std::optional<int> burn_in;
  int sweeps = 10;
  int imputations = 50;
  std::uint64_t seed = 0;
  double nugget = 1e-6;
  bool estimate_nugget = false;
  bool estimate_hidden_variance = false;
  double initial_jitter = 0.01;
  std::string mode = "single_chain";
  int threads = 1;
  bool verbose = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--arch", f.arch,
                  "Architecture as JSON text or a JSON file, e.g. "
                  "{\"layers\":[2,2,1],\"input_connected\":true}");
  cmd->add_option("--layers", f.layers, "Number of layers L")->check(CLI::PositiveNumber);
  cmd->add_option("--nodes", f.nodes, "Nodes per hidden layer")->check(CLI::PositiveNumber);
  cmd->add_flag("--ic,!--no-ic", f.ic, "Append the global input to layers 2..L");
  cmd->add_flag("--shared-range,!--per-dim-range", f.shared_range,
                "One range per node instead of one per input dimension");
  cmd->add_option("--T", f.iterations, "SEM iterations")->capture_default_str();
  cmd->add_option("--B", f.burn_in, "Burn-in snapshots (default 0.75 T)");
  cmd->add_option("--C", f.sweeps, "ESS sweeps per imputation step")->capture_default_str();
  cmd->add_option("--N", f.imputations, "Imputations for prediction")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--nugget", f.nugget, "Nugget of every node")->capture_default_str();
  cmd->add_flag("--estimate-nugget", f.estimate_nugget, "Estimate nuggets during training");
  cmd->add_flag("--estimate-hidden-variance", f.estimate_hidden_variance,
                "Estimate hidden-layer variances instead of keeping them at 1");
  cmd->add_option("--initial-jitter", f.initial_jitter,
                  "Noise sd added to the initial latent state")
      ->capture_default_str();
  cmd->add_option("--imputation-mode", f.mode, "single_chain or independent_chains")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads for prediction")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("-v,--verbose", f.verbose, "Print SEM progress to stderr");
}

EmulatorConfig emulator_config(const ModelFlags& f) {
  EmulatorConfig c;
  c.training.iterations = f.iterations;
  c.training.burn_in = f.burn_in ? *f.burn_in : (3 * f.iterations) / 4;
  c.training.ess_sweeps = f.sweeps;
  c.training.seed = f.seed;
  c.training.nugget = f.nugget;
  c.training.initial_fit.seed = f.seed;
  c.training.refit.seed = f.seed;
  c.training.initial_fit.estimate_nugget = f.estimate_nugget;
  c.training.refit.estimate_nugget = f.estimate_nugget;
  c.training.estimate_hidden_variance = f.estimate_hidden_variance;
  c.training.initial_jitter = f.initial_jitter;
  c.imputations = f.imputations;
  c.mode = imputation_mode_from_string(f.mode);
  c.validate();
  return c;
}

std::string read_text_or_file(const std::string& value) {
  std::error_code ec;
  if (fs::is_regular_file(value, ec)) {
    std::ifstream in(value);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return value;
}

// Explicit layer counts; empty when nothing was requested.
std::vector<int> requested_layers(const ModelFlags& f, Eigen::Index input_dims,
                                  Eigen::Index output_dims) {
  if (!f.arch.empty()) {
    return architecture_from_json(read_text_or_file(f.arch)).nodes_per_layer;
  }
  if (!f.layers && !f.nodes) return {};
  const int layers = f.layers.value_or(3);
  const int nodes = f.nodes.value_or(static_cast<int>(input_dims));
  std::vector<int> out(static_cast<std::size_t>(layers - 1), nodes);
  out.push_back(static_cast<int>(output_dims));
  return out;
}

Architecture resolve_architecture(const ModelFlags& f, Eigen::Index input_dims,
                                  Eigen::Index output_dims) {
  Architecture arch;
  if (!f.arch.empty()) arch = architecture_from_json(read_text_or_file(f.arch));
  arch.nodes_per_layer = requested_layers(f, input_dims, output_dims);
  if (arch.nodes_per_layer.empty()) {
    arch.nodes_per_layer = {static_cast<int>(input_dims), static_cast<int>(input_dims),
                            static_cast<int>(output_dims)};
  }
  arch.input_dims = input_dims;
  if (f.ic) arch.input_connected = *f.ic;
  if (f.shared_range) arch.shared_range = *f.shared_range;
  return arch;
}

ProgressCallback progress_printer(bool verbose) {
  if (!verbose) return {};
  return [](const IterationProgress& p) {
    if (p.iteration % 25 == 0 || p.iteration + 1 == p.total) {
      std::cerr << "SEM iteration " << p.iteration << "/" << p.total - 1 << '\n';
    }
  };
}

void print_warnings(const std::vector<std::string>& lines) {
  for (const auto& w : lines) std::cerr << "warning: " << w << '\n';
}

int run_train(const ModelFlags& f, const std::string& x_path, const std::string& y_path,
              const std::string& out_dir) {
  const bench::Dataset ds = bench::ingest_csv(x_path, y_path);
  const Architecture arch = resolve_architecture(f, ds.inputs.cols(), ds.outputs.cols());
  const EmulatorConfig config = emulator_config(f);
  Diagnostics diag;
  TrainTimings timings;
  const TrainedEmulator model =
      train(ds.training(), arch, config, progress_printer(f.verbose), &diag, &timings);
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "model.json";
  save(model, path);
  print_warnings(diag.summary());
  std::cout << "trained " << arch.describe() << " on " << ds.size() << " points in "
            << timings.train_seconds + timings.impute_seconds << " s\n"
            << "model written to " << path.string() << '\n';
  return kOk;
}

int run_predict(const std::string& model_path, const std::string& test_x,
                const std::string& test_y, const std::string& out_dir, int threads) {
  const TrainedEmulator model = load(model_path);
  const Matrix x0 = bench::read_csv_matrix(test_x);
  Diagnostics diag;
  PredictOptions opts;
  opts.threads = threads;
  const PredictionResult pred = predict(model, x0, opts, &diag);

  const Eigen::Index outputs = pred.mean.cols();
  Matrix table(x0.rows(), 2 * outputs);
  std::vector<std::string> header;
  for (Eigen::Index p = 0; p < outputs; ++p) {
    table.col(2 * p) = pred.mean.col(p);
    table.col(2 * p + 1) = pred.variance.col(p).cwiseMax(0.0).cwiseSqrt();
    header.push_back("mean" + std::to_string(p));
    header.push_back("sd" + std::to_string(p));
  }
  if (out_dir.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) std::cout << (j ? "," : "") << header[j];
    std::cout << '\n';
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) {
        std::cout << (j ? "," : "") << format_double(table(i, j));
      }
      std::cout << '\n';
    }
  } else {
    fs::create_directories(out_dir);
    bench::write_csv_matrix(fs::path(out_dir) / "predictions.csv", table, header);
  }
  if (!test_y.empty()) {
    const Matrix truth = bench::read_csv_matrix(test_y);
    if (truth.rows() != x0.rows() || truth.cols() != outputs) {
      throw RowCountMismatch("test outputs do not match the prediction shape");
    }
    for (Eigen::Index p = 0; p < outputs; ++p) {
      std::cerr << "NRMSEP y" << p << " = "
                << bench::nrmsep(truth.col(p), pred.mean.col(p)) << '\n';
    }
  }
  print_warnings(diag.summary());
  return kOk;
}

struct BenchFlags {
  std::string name;
  std::string from_report;
  std::string x, y, test_x, test_y, out;
  Eigen::Index train_size = 0;
  Eigen::Index test_size = 0;
  std::optional<std::uint64_t> design_seed;
  bool no_timings = false;
  bool no_control = false;
};

int run_bench(const ModelFlags& f, const BenchFlags& b) {
  bench::ExperimentConfig cfg;
  if (!b.from_report.empty()) {
    cfg = bench::experiment_config_from_json(read_text_or_file(b.from_report));
  } else {
    cfg.name = b.name;
    cfg.emulator = emulator_config(f);
    Eigen::Index input_dims = b.name == "synth5d" ? 5 : 1;
    Eigen::Index output_dims = 1;
    if (b.name == "csv" && (!f.arch.empty() || f.layers || f.nodes)) {
      const bench::Dataset ds = bench::ingest_csv(b.x, b.y);
      input_dims = ds.inputs.cols();
      output_dims = ds.outputs.cols();
    }
    cfg.layers = requested_layers(f, input_dims, output_dims);
    if (!f.arch.empty()) {
      const Architecture a = architecture_from_json(read_text_or_file(f.arch));
      cfg.input_connected = a.input_connected;
      cfg.shared_range = a.shared_range;
    }
    if (f.ic) cfg.input_connected = f.ic;
    if (f.shared_range) cfg.shared_range = f.shared_range;
    cfg.train_size = b.train_size;
    cfg.test_size = b.test_size;
    cfg.design_seed = b.design_seed;
    cfg.threads = f.threads;
    cfg.run_control = !b.no_control;
    cfg.record_timings = !b.no_timings;
    cfg.x = b.x;
    cfg.y = b.y;
    cfg.test_x = b.test_x;
    cfg.test_y = b.test_y;
  }
  cfg.out_dir = b.out;

  const bench::ExperimentReport report = bench::run_experiment(cfg);
  bench::write_report(report);
  std::cout << report_to_json(report);
  return kOk;
}

int run_inspect(const std::string& path) {
  const TrainedEmulator model = load(path);
  const Architecture& a = model.architecture;
  std::cout << "architecture: " << a.describe() << ", " << a.input_dims << " input dims, "
            << to_string(a.family) << '\n'
            << "training points: " << model.data.size() << '\n'
            << "imputations: " << model.imputations.size() << '\n'
            << "seed: " << model.seed << '\n'
            << "data digest: " << model.data_digest << '\n'
            << "config: " << config_to_json(model.config) << '\n';
  for (int l = 0; l < a.layers(); ++l) {
    for (int p = 0; p < a.nodes(l); ++p) {
      const KernelSpec& k = model.params[static_cast<std::size_t>(l)][static_cast<std::size_t>(p)];
      std::cout << node_name(l, p) << ": variance " << format_double(k.variance)
                << ", nugget " << format_double(k.nugget) << ", ranges [";
      for (Eigen::Index d = 0; d < k.ranges.size(); ++d) {
        std::cout << (d ? ", " : "") << format_double(k.ranges(d));
      }
      std::cout << "]\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep Gaussian process emulators trained by stochastic imputation"};
  app.require_subcommand(1);

  ModelFlags flags;
  std::string x_path, y_path, out_dir = ".";
  auto* train_cmd = app.add_subcommand("train", "Train an emulator from CSV data");
  add_model_flags(train_cmd, flags);
  train_cmd->add_option("--x", x_path, "Training inputs CSV")->required();
  train_cmd->add_option("--y", y_path, "Training outputs CSV")->required();
  train_cmd->add_option("--out", out_dir, "Output directory for model.json")
      ->capture_default_str();

  std::string model_path, test_x, test_y, pred_out;
  int pred_threads = 1;
  auto* predict_cmd = app.add_subcommand("predict", "Predict with a saved emulator");
  predict_cmd->add_option("model", model_path, "Model file")->required();
  predict_cmd->add_option("--test-x", test_x, "Test inputs CSV")->required();
  predict_cmd->add_option("--test-y", test_y, "Test outputs CSV (reports NRMSEP)");
  predict_cmd->add_option("--out", pred_out, "Directory for predictions.csv (default stdout)");
  predict_cmd->add_option("--threads", pred_threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  BenchFlags bflags;
  ModelFlags bench_model;
  auto* bench_cmd = app.add_subcommand("bench", "Run a built-in experiment");
  bench_cmd->add_option("name", bflags.name, "step, synth5d or csv")
      ->check(CLI::IsMember({"step", "synth5d", "csv"}));
  add_model_flags(bench_cmd, bench_model);
  bench_cmd->add_option("--x", bflags.x, "Training inputs CSV (csv experiment)");
  bench_cmd->add_option("--y", bflags.y, "Training outputs CSV (csv experiment)");
  bench_cmd->add_option("--test-x", bflags.test_x, "Test inputs CSV (csv experiment)");
  bench_cmd->add_option("--test-y", bflags.test_y, "Test outputs CSV (csv experiment)");
  bench_cmd->add_option("--train-size", bflags.train_size, "Training points (built-ins)");
  bench_cmd->add_option("--test-size", bflags.test_size, "Test points (built-ins)");
  bench_cmd->add_option("--design-seed", bflags.design_seed,
                        "Seed of random designs (default: --seed)");
  bench_cmd->add_option("--out", bflags.out, "Directory for report.json and plot CSVs");
  bench_cmd->add_option("--from-report", bflags.from_report,
                        "Re-run the configuration echoed in a report.json");
  bench_cmd->add_flag("--no-timings", bflags.no_timings,
                      "Omit wall-clock timings so reports are reproducible byte for byte");
  bench_cmd->add_flag("--no-control", bflags.no_control, "Skip the single-layer GP control");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a saved emulator");
  inspect_cmd->add_option("model", inspect_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return run_train(flags, x_path, y_path, out_dir);
    if (*predict_cmd) return run_predict(model_path, test_x, test_y, pred_out, pred_threads);
    if (*bench_cmd) {
      if (bflags.name.empty() && bflags.from_report.empty()) {
        std::cerr << "bench: give an experiment name or --from-report\n";
        return kUsage;
      }
      return run_bench(bench_model, bflags);
    }
    if (*inspect_cmd) return run_inspect(inspect_path);
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ModelFormatError& e) {
    std::cerr << "model file error: " << e.what() << '\n';
    return kData;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const SingularMatrixError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
