#include "sidgp/sampler.hpp"

#include "sidgp/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sidgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sanitize(double v) { return std::isnan(v) ? kNegInf : v; }

}  // namespace

Vector ess_update(const Factorization& prior, double prior_variance,
                  const Vector& current, const LogLikelihood& log_lik, Rng& rng,
                  EssOutcome* outcome) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  Vector z(current.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vector nu = std::sqrt(prior_variance) * (prior.llt.matrixL() * z).eval();

  const double current_ll = sanitize(log_lik(current));
  const double level = current_ll + std::log1p(-uniform(rng));

  double phi = kTwoPi * uniform(rng);
  double lo = phi - kTwoPi;
  double hi = phi;

  EssOutcome local;
  while (true) {
    Vector proposal = current * std::cos(phi) + nu * std::sin(phi);
    const double ll = sanitize(log_lik(proposal));
    ++local.proposals;
    if (ll > level) {
      local.log_likelihood = ll;
      if (outcome) *outcome = local;
      return proposal;
    }
    if (phi < 0.0) {
      lo = phi;
    } else {
      hi = phi;
    }
    if (hi - lo < kEssMinBracket) {
      local.underflow = true;
      local.log_likelihood = current_ll;
      if (outcome) *outcome = local;
      return current;
    }
    phi = lo + (hi - lo) * uniform(rng);
  }
}

void SamplerStats::resize(const Architecture& arch) {
  nodes.resize(arch.hidden_layers());
  for (int l = 0; l < arch.hidden_layers(); ++l) nodes[l].resize(arch.nodes(l));
}

std::size_t SamplerStats::total_updates() const {
  std::size_t n = 0;
  for (const auto& layer : nodes)
    for (const auto& s : layer) n += s.updates;
  return n;
}

std::size_t SamplerStats::total_proposals() const {
  std::size_t n = 0;
  for (const auto& layer : nodes)
    for (const auto& s : layer) n += s.proposals;
  return n;
}

std::size_t SamplerStats::total_underflows() const {
  std::size_t n = 0;
  for (const auto& layer : nodes)
    for (const auto& s : layer) n += s.underflows;
  return n;
}

double conditional_loglik(const Architecture& arch, const TrainingData& data,
                          const LatentState& state, const NetworkParams& params,
                          int layer, int node, const Vector& candidate,
                          Diagnostics* diag) {
  if (layer < 0 || layer >= arch.hidden_layers()) {
    throw ContractViolation("conditional_loglik: layer " + std::to_string(layer + 1) +
                            " is not a hidden layer");
  }
  if (node < 0 || node >= arch.nodes(layer)) {
    throw ContractViolation("conditional_loglik: node index out of range");
  }
  if (candidate.size() != data.size()) {
    throw ContractViolation("conditional_loglik: candidate has the wrong length");
  }

  const int next = layer + 1;
  Matrix inputs = layer_inputs(arch, data, state, next);
  inputs.col(node) = candidate;
  const Matrix& outputs = layer_outputs(data, state, next);

  double total = 0.0;
  for (int q = 0; q < arch.nodes(next); ++q) {
    const KernelSpec& kernel = params[next][q];
    auto fact = try_factorize(correlation_matrix(kernel, inputs));
    if (!fact) {
      if (diag) {
        diag->warn("conditional_factorization_failed",
                   node_name(next, q) + " correlation not factorizable for a "
                   "candidate of " + node_name(layer, node));
      }
      return kNegInf;
    }
    total += log_normal_density(*fact, outputs.col(q), kernel.variance);
  }
  return total;
}

LatentState gibbs_sweep(const Architecture& arch, const TrainingData& data,
                        LatentState state, const NetworkParams& params, Rng& rng,
                        SamplerStats* stats, Diagnostics* diag) {
  if (stats && stats->nodes.size() != static_cast<std::size_t>(arch.hidden_layers())) {
    stats->resize(arch);
  }
  for (int l = 0; l < arch.hidden_layers(); ++l) {
    for (int p = 0; p < arch.nodes(l); ++p) {
      const KernelSpec& kernel = params[l][p];
      const Matrix inputs = layer_inputs(arch, data, state, l);
      auto prior = try_factorize(correlation_matrix(kernel, inputs));
      if (!prior) {
        if (diag) {
          diag->warn("prior_factorization_failed",
                     node_name(l, p) + " skipped: prior correlation singular");
        }
        continue;
      }

      std::size_t failed = 0;
      Diagnostics* d = diag;
      LogLikelihood ll = [&](const Vector& w) {
        const double v = conditional_loglik(arch, data, state, params, l, p, w, d);
        if (!std::isfinite(v)) ++failed;
        return v;
      };
      EssOutcome outcome;
      const Vector current = state.hidden[l].col(p);
      state.hidden[l].col(p) =
          ess_update(*prior, kernel.variance, current, ll, rng, &outcome);

      if (outcome.underflow && diag) {
        diag->warn("ess_shrink_underflow",
                   node_name(l, p) + " kept its current value");
      }
      if (stats) {
        auto& s = stats->nodes[l][p];
        ++s.updates;
        s.proposals += static_cast<std::size_t>(outcome.proposals);
        s.underflows += outcome.underflow ? 1 : 0;
        s.failed_likelihoods += failed;
      }
    }
  }
  return state;
}

LatentState burn_in(const Architecture& arch, const TrainingData& data,
                    LatentState state, const NetworkParams& params, int sweeps,
                    Rng& rng, SamplerStats* stats, Diagnostics* diag) {
  if (sweeps < 1) throw ContractViolation("burn_in needs at least one sweep");
  for (int c = 0; c < sweeps; ++c) {
    state = gibbs_sweep(arch, data, std::move(state), params, rng, stats, diag);
  }
  return state;
}

LatentState initial_state(const Architecture& arch, const TrainingData& data,
                          Rng& rng, double jitter) {
  if (!(jitter >= 0.0)) throw ContractViolation("initial_state: jitter must be >= 0");
  std::normal_distribution<double> noise(0.0, 1.0);
  LatentState state;
  for (int l = 0; l < arch.hidden_layers(); ++l) {
    const Matrix& source = l == 0 ? data.x : state.hidden[l - 1];
    Matrix h(data.size(), arch.nodes(l));
    for (int p = 0; p < arch.nodes(l); ++p) {
      h.col(p) = source.col(p % source.cols());
      for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, p) += jitter * noise(rng);
    }
    state.hidden.push_back(std::move(h));
  }
  return state;
}

}  // namespace sidgp
