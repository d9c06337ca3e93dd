#include "sidgp/bench/experiment.hpp"

#include "sidgp/bench/dataset.hpp"
#include "sidgp/bench/problems.hpp"
#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>

namespace sidgp::bench {

using json = nlohmann::json;

namespace {

// Rethrows library errors with the experiment phase prefixed, keeping the
// error category.
template <typename Fn>
auto in_phase(const std::string& phase, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const RowCountMismatch& e) {
    throw RowCountMismatch(phase + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(phase + ": " + e.what());
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(phase + ": " + e.what());
  } catch (const NumericFailure& e) {
    throw NumericFailure(phase + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw ContractViolation(phase + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Problem {
  Matrix train_x, train_y, test_x, truth;
  std::vector<std::string> output_names;
  std::vector<int> layers;
  bool input_connected = false;
  bool shared_range = false;
  std::vector<std::string> notes;
};

Problem build_problem(const ExperimentConfig& config) {
  Problem pb;
  const std::uint64_t seed = config.design_seed.value_or(config.emulator.training.seed);
  if (config.name == "step") {
    const Eigen::Index n = config.train_size > 0 ? config.train_size : 10;
    const Eigen::Index m = config.test_size > 0 ? config.test_size : 200;
    pb.train_x = step_training_inputs(n);
    pb.test_x = step_test_inputs(m);
    pb.train_y = pb.train_x.unaryExpr([](double x) { return step_function(x); });
    pb.truth = pb.test_x.unaryExpr([](double x) { return step_function(x); });
    pb.output_names = {"y"};
    pb.layers = {1, 1, 1};
    pb.notes.push_back("training inputs: " + std::to_string(n) +
                       " equally spaced points from 0 to the largest double below 1");
    pb.notes.push_back("test inputs: i/" + std::to_string(m) + " for i = 0.." +
                       std::to_string(m - 1));
  } else if (config.name == "synth5d") {
    const Eigen::Index n = config.train_size > 0 ? config.train_size : 100;
    const Eigen::Index m = config.test_size > 0 ? config.test_size : 500;
    pb.train_x = lhs_sample(n, 5, seed);
    pb.test_x = lhs_sample(m, 5, seed ^ 0x9e3779b97f4a7c15ULL);
    pb.train_y.resize(n, 1);
    pb.truth.resize(m, 1);
    for (Eigen::Index i = 0; i < n; ++i) pb.train_y(i, 0) = function_5d(pb.train_x.row(i).transpose());
    for (Eigen::Index i = 0; i < m; ++i) pb.truth(i, 0) = function_5d(pb.test_x.row(i).transpose());
    pb.output_names = {"y"};
    pb.layers = {5, 1};
    pb.input_connected = true;
    pb.notes.push_back("designs: Latin hypercube samples on [0, 1]^5 from design seed " +
                       std::to_string(seed));
  } else if (config.name == "csv") {
    if (config.x.empty() || config.y.empty() || config.test_x.empty() ||
        config.test_y.empty()) {
      throw ContractViolation("csv experiment needs training and test x/y files");
    }
    const Dataset train = ingest_csv(config.x, config.y);
    const Dataset test = ingest_csv(config.test_x, config.test_y);
    if (test.inputs.cols() != train.inputs.cols() ||
        test.outputs.cols() != train.outputs.cols()) {
      throw DataError("test files do not have the training column counts");
    }
    pb.train_x = train.inputs;
    pb.train_y = train.outputs;
    pb.test_x = test.inputs;
    pb.truth = test.outputs;
    pb.output_names = train.output_names;
    const auto d = static_cast<int>(train.inputs.cols());
    pb.layers = {d, d, static_cast<int>(train.outputs.cols())};
    pb.shared_range = true;
  } else {
    throw ContractViolation("unknown experiment '" + config.name +
                            "' (expected step, synth5d or csv)");
  }
  if (!config.layers.empty()) pb.layers = config.layers;
  if (config.input_connected) pb.input_connected = *config.input_connected;
  if (config.shared_range) pb.shared_range = *config.shared_range;
  return pb;
}

ArmResult run_arm(const std::string& label, const Architecture& arch,
                  const TrainingData& data, const Matrix& test_x, const Matrix& truth,
                  const ExperimentConfig& config, bool keep_components, Diagnostics& diag) {
  ArmResult arm;
  arm.label = label;
  arm.architecture = arch;

  TrainTimings tt;
  arm.model = in_phase(label + " training", [&] {
    return train(data, arch, config.emulator, {}, &diag, &tt);
  });
  arm.timings.train = tt.train_seconds;
  arm.timings.impute = tt.impute_seconds;

  const auto start = std::chrono::steady_clock::now();
  PredictOptions opts;
  opts.keep_components = keep_components;
  opts.threads = config.threads;
  arm.prediction = in_phase(label + " prediction",
                            [&] { return predict(arm.model, test_x, opts, &diag); });
  arm.timings.predict = seconds_since(start);
  if (!config.record_timings) arm.timings = {};

  for (Eigen::Index p = 0; p < truth.cols(); ++p) {
    arm.nrmsep.push_back(in_phase(label + " scoring", [&] {
      return nrmsep(truth.col(p), arm.prediction.mean.col(p));
    }));
  }
  return arm;
}

json timings_json(const ExperimentConfig& config, const PhaseTimings& t) {
  if (!config.record_timings) return json::object();
  return json{{"train", t.train}, {"impute", t.impute}, {"predict", t.predict}};
}

json nrmsep_json(const ExperimentReport& report, const ArmResult& arm) {
  json out = json::object();
  for (std::size_t p = 0; p < arm.nrmsep.size(); ++p) {
    out[report.output_names[p]] = arm.nrmsep[p];
  }
  return out;
}

json config_echo(const ExperimentConfig& c) {
  return json{{"experiment", c.name},
              {"layers", c.layers},
              {"input_connected", c.input_connected.value_or(false)},
              {"shared_range", c.shared_range.value_or(false)},
              {"train_size", c.train_size},
              {"test_size", c.test_size},
              {"design_seed", c.design_seed.value_or(c.emulator.training.seed)},
              {"threads", c.threads},
              {"run_control", c.run_control},
              {"record_timings", c.record_timings},
              {"x", c.x.string()},
              {"y", c.y.string()},
              {"test_x", c.test_x.string()},
              {"test_y", c.test_y.string()},
              {"emulator", json::parse(config_to_json(c.emulator))}};
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, bool keep_components) {
  in_phase("configuration", [&] { config.emulator.validate(); });
  if (config.threads < 1) throw ContractViolation("configuration: threads must be >= 1");

  Problem pb = in_phase("design", [&] { return build_problem(config); });

  ExperimentReport report;
  report.config = config;
  report.config.layers = pb.layers;
  report.config.input_connected = pb.input_connected;
  report.config.shared_range = pb.shared_range;
  report.config.train_size = pb.train_x.rows();
  report.config.test_size = pb.test_x.rows();
  report.config.design_seed = config.design_seed.value_or(config.emulator.training.seed);
  report.seed = config.emulator.training.seed;
  report.output_names = pb.output_names;
  report.train_x = pb.train_x;
  report.train_y = pb.train_y;
  report.test_x = pb.test_x;
  report.truth = pb.truth;
  report.notes = pb.notes;

  const TrainingData data{pb.train_x, pb.train_y};
  Architecture arch;
  arch.nodes_per_layer = pb.layers;
  arch.input_dims = pb.train_x.cols();
  arch.input_connected = pb.input_connected;
  arch.shared_range = pb.shared_range;
  in_phase("configuration", [&] { arch.validate(data); });

  Diagnostics diag;
  report.dgp = run_arm("dgp", arch, data, pb.test_x, pb.truth, report.config,
                       keep_components, diag);
  if (config.run_control) {
    Architecture gp;
    gp.nodes_per_layer = {static_cast<int>(pb.train_y.cols())};
    gp.input_dims = arch.input_dims;
    gp.shared_range = arch.shared_range;
    gp.family = arch.family;
    report.control = run_arm("gp", gp, data, pb.test_x, pb.truth, report.config,
                             keep_components, diag);
  }
  report.warnings = diag.summary();
  return report;
}

std::string report_to_json(const ExperimentReport& report) {
  json doc;
  doc["experiment"] = report.config.name;
  doc["architecture"] = json::parse(architecture_to_json(report.dgp.architecture));
  doc["nrmsep"] = nrmsep_json(report, report.dgp);
  doc["timings_s"] = timings_json(report.config, report.dgp.timings);
  if (report.control) {
    doc["control"] = {
        {"architecture", json::parse(architecture_to_json(report.control->architecture))},
        {"nrmsep", nrmsep_json(report, *report.control)},
        {"timings_s", timings_json(report.config, report.control->timings)}};
  }
  doc["config"] = config_echo(report.config);
  doc["seed"] = report.seed;
  doc["warnings"] = report.warnings;
  doc["notes"] = report.notes;
  return doc.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& report_json) {
  try {
    json doc = json::parse(report_json);
    const json& c = doc.contains("config") ? doc.at("config") : doc;
    ExperimentConfig out;
    out.name = c.at("experiment").get<std::string>();
    out.layers = c.at("layers").get<std::vector<int>>();
    out.input_connected = c.at("input_connected").get<bool>();
    out.shared_range = c.at("shared_range").get<bool>();
    out.train_size = c.at("train_size").get<Eigen::Index>();
    out.test_size = c.at("test_size").get<Eigen::Index>();
    if (c.contains("design_seed")) out.design_seed = c.at("design_seed").get<std::uint64_t>();
    out.threads = c.at("threads").get<int>();
    out.run_control = c.at("run_control").get<bool>();
    out.record_timings = c.at("record_timings").get<bool>();
    out.x = c.at("x").get<std::string>();
    out.y = c.at("y").get<std::string>();
    out.test_x = c.at("test_x").get<std::string>();
    out.test_y = c.at("test_y").get<std::string>();
    out.emulator = config_from_json(c.at("emulator").dump());
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid experiment configuration: ") + e.what());
  } catch (const ModelFormatError& e) {
    throw DataError(std::string("invalid experiment configuration: ") + e.what());
  }
}

std::vector<std::string> plot_header(const ExperimentReport& report) {
  std::vector<std::string> header;
  for (Eigen::Index d = 0; d < report.test_x.cols(); ++d) {
    header.push_back("x" + std::to_string(d));
  }
  header.insert(header.end(), {"truth", "mean", "sd"});
  return header;
}

Matrix plot_data(const ExperimentReport& report, const ArmResult& arm, Eigen::Index output) {
  const Eigen::Index n = report.test_x.rows();
  const Eigen::Index d = report.test_x.cols();
  Matrix out(n, d + 3);
  out.leftCols(d) = report.test_x;
  out.col(d) = report.truth.col(output);
  out.col(d + 1) = arm.prediction.mean.col(output);
  out.col(d + 2) = arm.prediction.variance.col(output).cwiseMax(0.0).cwiseSqrt();
  return out;
}

void write_report(const ExperimentReport& report) {
  const auto& dir = report.config.out_dir;
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
  {
    std::ofstream out(dir / "report.json", std::ios::trunc);
    if (!out) throw DataError("cannot write report to '" + dir.string() + "'");
    out << report_to_json(report);
  }
  auto emit = [&](const ArmResult& arm) {
    for (Eigen::Index p = 0; p < report.truth.cols(); ++p) {
      std::string file = "plot_" + arm.label;
      if (report.truth.cols() > 1) file += "_" + report.output_names[static_cast<std::size_t>(p)];
      write_csv_matrix(dir / (file + ".csv"), plot_data(report, arm, p), plot_header(report));
    }
  };
  emit(report.dgp);
  if (report.control) emit(*report.control);
}

}  // namespace sidgp::bench
