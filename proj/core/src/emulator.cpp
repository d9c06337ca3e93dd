#include "sidgp/emulator.hpp"

#include "parallel.hpp"
#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace sidgp {

std::string_view to_string(ImputationMode mode) {
  switch (mode) {
    case ImputationMode::SingleChain:
      return "single_chain";
    case ImputationMode::IndependentChains:
      return "independent_chains";
  }
  return "unknown";
}

ImputationMode imputation_mode_from_string(std::string_view name) {
  if (name == "single_chain") return ImputationMode::SingleChain;
  if (name == "independent_chains") return ImputationMode::IndependentChains;
  throw ContractViolation("unknown imputation mode '" + std::string(name) + "'");
}

void EmulatorConfig::validate() const {
  training.validate();
  if (imputations < 1) throw ContractViolation("need at least one imputation");
  if (thinning < 1) throw ContractViolation("thinning must be >= 1");
}

void TrainedEmulator::rebuild() {
  networks.clear();
  networks.reserve(imputations.size());
  for (std::size_t i = 0; i < imputations.size(); ++i) {
    const LatentState& state = imputations[i];
    validate_state(architecture, data, state);
    LinkedNetwork net;
    net.input_connected = architecture.input_connected;
    for (int l = 0; l < architecture.layers(); ++l) {
      const Matrix inputs = layer_inputs(architecture, data, state, l);
      const Matrix& outputs = layer_outputs(data, state, l);
      std::vector<GPNode> layer;
      layer.reserve(static_cast<std::size_t>(architecture.nodes(l)));
      for (int p = 0; p < architecture.nodes(l); ++p) {
        layer.emplace_back(inputs, outputs.col(p), params.at(l).at(p),
                           node_name(l, p) + " (imputation " + std::to_string(i + 1) +
                               ")");
      }
      net.layers.push_back(std::move(layer));
    }
    networks.push_back(std::move(net));
  }
}

bool TrainedEmulator::operator==(const TrainedEmulator& o) const {
  return architecture == o.architecture && data == o.data && params == o.params &&
         imputations == o.imputations && config == o.config && seed == o.seed &&
         data_digest == o.data_digest;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Neumaier compensated summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

TrainedEmulator train(const TrainingData& data, const Architecture& arch,
                      const EmulatorConfig& config, const ProgressCallback& progress,
                      Diagnostics* diag, TrainTimings* timings) {
  arch.validate(data);
  config.validate();

  TrainedEmulator model;
  model.architecture = arch;
  model.data = data;
  model.config = config;
  model.seed = config.training.seed;
  model.data_digest = data_digest(data);

  auto start = std::chrono::steady_clock::now();
  TrainingResult trained = sem_train(arch, data, config.training, progress, diag);
  model.params = average_trail(trained.trail, config.training.burn_in);
  if (timings) timings->train_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  if (arch.hidden_layers() == 0) {
    model.imputations.push_back(LatentState{});
  } else if (config.mode == ImputationMode::SingleChain) {
    Rng rng = split_rng(config.training.seed, 1);
    LatentState state = burn_in(arch, data, std::move(trained.final_state), model.params,
                                config.training.ess_sweeps, rng, nullptr, diag);
    for (int i = 0; i < config.imputations; ++i) {
      state = burn_in(arch, data, std::move(state), model.params, config.thinning, rng,
                      nullptr, diag);
      model.imputations.push_back(state);
    }
  } else {
    for (int i = 0; i < config.imputations; ++i) {
      Rng rng = split_rng(config.training.seed, 1000 + static_cast<std::uint64_t>(i));
      model.imputations.push_back(burn_in(arch, data, trained.final_state, model.params,
                                          std::max(config.training.ess_sweeps,
                                                   config.thinning),
                                          rng, nullptr, diag));
    }
  }
  model.rebuild();
  if (timings) timings->impute_seconds = seconds_since(start);
  return model;
}

GaussianBelief mix_components(std::span<const GaussianBelief> components) {
  if (components.empty()) throw ContractViolation("mix_components: no components");
  const double n = static_cast<double>(components.size());
  CompensatedSum mean_sum;
  for (const auto& c : components) mean_sum.add(c.mean);
  GaussianBelief out;
  out.mean = mean_sum.value() / n;
  // Mean within-component variance plus spread of the component means.
  CompensatedSum var_sum;
  for (const auto& c : components) {
    const double d = c.mean - out.mean;
    var_sum.add(c.variance + d * d);
  }
  out.variance = var_sum.value() / n;
  return out;
}

PredictionResult predict(const TrainedEmulator& model, const Matrix& x0,
                         const PredictOptions& options, Diagnostics* diag) {
  if (model.networks.size() != model.imputations.size() || model.networks.empty()) {
    throw ContractViolation("predict: model has no conditioned networks (call rebuild)");
  }
  if (x0.cols() != model.architecture.input_dims) {
    throw ContractViolation("predict: test inputs have " + std::to_string(x0.cols()) +
                            " columns, model expects " +
                            std::to_string(model.architecture.input_dims));
  }
  const Eigen::Index n = x0.rows();
  const int outputs = model.architecture.output_dims();
  const std::size_t n_imp = model.networks.size();

  PredictionResult result;
  result.mean.resize(n, outputs);
  result.variance.resize(n, outputs);
  if (options.keep_components) {
    result.component_mean.assign(n_imp, Matrix(n, outputs));
    result.component_variance.assign(n_imp, Matrix(n, outputs));
  }

  detail::parallel_for(n, options.threads, [&](std::ptrdiff_t row) {
    const Vector x = x0.row(row).transpose();
    std::vector<std::vector<GaussianBelief>> per_output(
        static_cast<std::size_t>(outputs), std::vector<GaussianBelief>(n_imp));
    for (std::size_t i = 0; i < n_imp; ++i) {
      std::vector<GaussianBelief> out;
      try {
        out = propagate_layers(model.networks[i], x, diag);
      } catch (const NumericFailure& e) {
        throw NumericFailure("imputation " + std::to_string(i + 1) + ": " + e.what());
      }
      for (int p = 0; p < outputs; ++p) {
        per_output[static_cast<std::size_t>(p)][i] = out[static_cast<std::size_t>(p)];
        if (options.keep_components) {
          result.component_mean[i](row, p) = out[static_cast<std::size_t>(p)].mean;
          result.component_variance[i](row, p) = out[static_cast<std::size_t>(p)].variance;
        }
      }
    }
    for (int p = 0; p < outputs; ++p) {
      const GaussianBelief mixed = mix_components(per_output[static_cast<std::size_t>(p)]);
      result.mean(row, p) = mixed.mean;
      result.variance(row, p) = mixed.variance;
    }
  });
  return result;
}

}  // namespace sidgp
