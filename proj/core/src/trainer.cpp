#include "sidgp/trainer.hpp"

#include "sidgp/error.hpp"
#include "sidgp/gp_node.hpp"

#include <algorithm>
#include <cmath>

namespace sidgp {

void TrainingConfig::validate() const {
  if (iterations < 2) throw ContractViolation("SEM needs at least two iterations");
  if (burn_in < 1 || burn_in >= iterations) {
    throw ContractViolation("SEM burn-in must satisfy 1 <= B < T");
  }
  if (ess_sweeps < 1) throw ContractViolation("ESS sweeps per step must be >= 1");
  if (!(initial_jitter >= 0.0)) throw ContractViolation("initial jitter must be >= 0");
  if (!(nugget >= 0.0)) throw ContractViolation("nugget must be non-negative");
}

int ParameterTrail::length() const {
  if (snapshots.empty() || snapshots[0].empty()) return 0;
  return static_cast<int>(snapshots[0][0].size());
}

NetworkParams ParameterTrail::at(int t) const {
  NetworkParams out(snapshots.size());
  for (std::size_t l = 0; l < snapshots.size(); ++l) {
    for (const auto& node : snapshots[l]) out[l].push_back(node.at(t));
  }
  return out;
}

void ParameterTrail::append(const NetworkParams& params) {
  if (snapshots.empty()) {
    snapshots.resize(params.size());
    for (std::size_t l = 0; l < params.size(); ++l) snapshots[l].resize(params[l].size());
  }
  for (std::size_t l = 0; l < params.size(); ++l) {
    for (std::size_t p = 0; p < params[l].size(); ++p) {
      snapshots[l][p].push_back(params[l][p]);
    }
  }
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<double> pairwise_distances(const Matrix& x, Eigen::Index d) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      out.push_back(std::abs(x(i, d) - x(j, d)));
  return out;
}

double positive_or_one(double v) { return v > 0.0 && std::isfinite(v) ? v : 1.0; }

}  // namespace

NetworkParams initialize_params(const Architecture& arch, const TrainingData& data,
                                const LatentState& state, double nugget) {
  NetworkParams params(arch.layers());
  for (int l = 0; l < arch.layers(); ++l) {
    const Matrix inputs = layer_inputs(arch, data, state, l);
    KernelSpec base;
    base.family = arch.family;
    base.nugget = nugget;
    if (arch.shared_range) {
      std::vector<double> all;
      for (Eigen::Index d = 0; d < inputs.cols(); ++d) {
        auto dist = pairwise_distances(inputs, d);
        all.insert(all.end(), dist.begin(), dist.end());
      }
      base.ranges = Vector::Constant(1, positive_or_one(median(std::move(all))));
    } else {
      base.ranges.resize(inputs.cols());
      for (Eigen::Index d = 0; d < inputs.cols(); ++d) {
        base.ranges(d) = positive_or_one(median(pairwise_distances(inputs, d)));
      }
    }
    const bool last = l == arch.layers() - 1;
    for (int p = 0; p < arch.nodes(l); ++p) {
      KernelSpec k = base;
      if (last) {
        const auto y = data.y.col(p).array();
        const double var = (y - y.mean()).square().mean();
        k.variance = positive_or_one(var);
      }
      params[l].push_back(std::move(k));
    }
  }
  return params;
}

TrainingResult sem_train(const Architecture& arch, const TrainingData& data,
                         const TrainingConfig& config, const ProgressCallback& progress,
                         Diagnostics* diag) {
  arch.validate(data);
  config.validate();

  Rng rng = split_rng(config.seed, 0);
  TrainingResult result;
  LatentState state = initial_state(arch, data, rng, config.initial_jitter);
  NetworkParams params = initialize_params(arch, data, state, config.nugget);
  result.trail.append(params);
  result.sampler_stats.resize(arch);

  std::vector<std::vector<int>> consecutive_failures(arch.layers());
  for (int l = 0; l < arch.layers(); ++l) consecutive_failures[l].assign(arch.nodes(l), 0);

  const bool has_latent = arch.hidden_layers() > 0;
  for (int t = 1; t < config.iterations; ++t) {
    // A plain GP has nothing to impute; one fit suffices and is repeated.
    if (!has_latent && t > 1) {
      result.trail.append(params);
      continue;
    }
    if (has_latent) {
      state = burn_in(arch, data, std::move(state), params, config.ess_sweeps, rng,
                      &result.sampler_stats, diag);
    }

    IterationProgress report;
    report.iteration = t;
    report.total = config.iterations;
    report.log_likelihoods.resize(arch.layers());

    FitOptions options = t == 1 ? config.initial_fit : config.refit;
    for (int l = 0; l < arch.layers(); ++l) {
      const Matrix inputs = layer_inputs(arch, data, state, l);
      const Matrix& outputs = layer_outputs(data, state, l);
      for (int p = 0; p < arch.nodes(l); ++p) {
        options.seed = config.seed ^ (static_cast<std::uint64_t>(t) << 20) ^
                       (static_cast<std::uint64_t>(l) << 10) ^
                       static_cast<std::uint64_t>(p);
        options.estimate_variance =
            l + 1 == arch.layers() || config.estimate_hidden_variance;
        double ll = 0.0;
        try {
          FitResult fit = fit_node(inputs, outputs.col(p), params[l][p], options);
          params[l][p] = fit.kernel;
          ll = fit.log_likelihood;
          consecutive_failures[l][p] = 0;
          if (!fit.converged && diag) {
            diag->warn("fit_not_converged",
                       node_name(l, p) + " at iteration " + std::to_string(t));
          }
        } catch (const Error& e) {
          ++result.fit_failures;
          if (diag) {
            diag->warn("fit_failed", node_name(l, p) + " at iteration " +
                                         std::to_string(t) + ": " + e.what());
          }
          if (++consecutive_failures[l][p] > config.max_consecutive_failures) {
            throw NumericFailure(node_name(l, p) + " failed to fit " +
                                 std::to_string(consecutive_failures[l][p]) +
                                 " consecutive times: " + e.what());
          }
          ll = std::nan("");
        }
        report.log_likelihoods[l].push_back(ll);
      }
    }
    result.trail.append(params);
    if (progress) progress(report);
  }

  result.last = params;
  result.final_state = std::move(state);
  return result;
}

NetworkParams average_trail(const ParameterTrail& trail, int burn_in) {
  const int length = trail.length();
  if (burn_in < 0 || burn_in >= length) {
    throw ContractViolation("average_trail: burn-in must be below the trail length");
  }
  const double count = static_cast<double>(length - burn_in);
  NetworkParams out(trail.snapshots.size());
  for (std::size_t l = 0; l < trail.snapshots.size(); ++l) {
    for (const auto& node : trail.snapshots[l]) {
      // Accumulate deviations from the first kept snapshot so that a
      // constant trail averages to exactly that constant.
      const KernelSpec& ref = node[static_cast<std::size_t>(burn_in)];
      double dv = 0.0;
      double dn = 0.0;
      Vector dr = Vector::Zero(ref.ranges.size());
      for (int t = burn_in; t < length; ++t) {
        const KernelSpec& k = node[static_cast<std::size_t>(t)];
        dv += k.variance - ref.variance;
        dn += k.nugget - ref.nugget;
        dr += k.ranges - ref.ranges;
      }
      KernelSpec avg = ref;
      avg.variance += dv / count;
      avg.nugget += dn / count;
      avg.ranges += dr / count;
      out[l].push_back(std::move(avg));
    }
  }
  return out;
}

}  // namespace sidgp
