#ifndef SIDGP_SAMPLER_HPP
#define SIDGP_SAMPLER_HPP

#include "sidgp/architecture.hpp"
#include "sidgp/diagnostics.hpp"
#include "sidgp/gp_node.hpp"
#include "sidgp/rng.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace sidgp {

using LogLikelihood = std::function<double(const Vector&)>;

/// What happened during one elliptical slice update.
struct EssOutcome {
  int proposals = 0;
  bool underflow = false;
  double log_likelihood = 0.0;
};

/// Bracket width below which the shrinking loop gives up.
inline constexpr double kEssMinBracket = 1e-12;

/// One elliptical slice sampling update for a target proportional to
/// exp(log_lik(w)) N(w; 0, prior_variance * R), where `prior` factorizes R.
///
/// Rejection-free: the returned state was accepted, unless the angle bracket
/// shrank below kEssMinBracket, in which case `current` is returned and
/// `outcome->underflow` is set. A NaN log likelihood counts as -inf. If the
/// current state itself has log likelihood -inf, the first proposal with a
/// finite one is accepted.
Vector ess_update(const Factorization& prior, double prior_variance,
                  const Vector& current, const LogLikelihood& log_lik, Rng& rng,
                  EssOutcome* outcome = nullptr);

/// Per-node proposal bookkeeping accumulated over sweeps.
struct NodeSamplerStats {
  std::size_t updates = 0;
  std::size_t proposals = 0;
  std::size_t underflows = 0;
  std::size_t failed_likelihoods = 0;
};

/// Indexed [hidden layer][node].
struct SamplerStats {
  std::vector<std::vector<NodeSamplerStats>> nodes;

  void resize(const Architecture& arch);
  std::size_t total_updates() const;
  std::size_t total_proposals() const;
  std::size_t total_underflows() const;
};

/// Log likelihood factor of hidden node (layer, node) in its conditional
/// posterior: the sum over nodes q of the next layer of
/// log N(out_q; 0, sigma_q^2 R_q(next-layer inputs with `candidate`
/// substituted for the node's output)). The next layer of the last hidden
/// layer observes y. Returns -inf (and warns) if a factorization fails.
double conditional_loglik(const Architecture& arch, const TrainingData& data,
                          const LatentState& state, const NetworkParams& params,
                          int layer, int node, const Vector& candidate,
                          Diagnostics* diag = nullptr);

/// One ESS-within-Gibbs sweep: every hidden node, layers ascending then
/// nodes ascending, is replaced by one ESS update of its conditional
/// posterior given the current values of all others.
LatentState gibbs_sweep(const Architecture& arch, const TrainingData& data,
                        LatentState state, const NetworkParams& params, Rng& rng,
                        SamplerStats* stats = nullptr, Diagnostics* diag = nullptr);

/// `sweeps` successive gibbs_sweep applications.
LatentState burn_in(const Architecture& arch, const TrainingData& data,
                    LatentState state, const NetworkParams& params, int sweeps,
                    Rng& rng, SamplerStats* stats = nullptr,
                    Diagnostics* diag = nullptr);

/// Starting latent values: each hidden node copies one column of its
/// layer's inputs (column p mod width, global input columns excluded) plus
/// N(0, jitter^2) noise.
LatentState initial_state(const Architecture& arch, const TrainingData& data,
                          Rng& rng, double jitter = 0.01);

}  // namespace sidgp

#endif  // SIDGP_SAMPLER_HPP
