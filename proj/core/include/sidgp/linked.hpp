#ifndef SIDGP_LINKED_HPP
#define SIDGP_LINKED_HPP

#include "sidgp/diagnostics.hpp"
#include "sidgp/gp_node.hpp"

#include <span>
#include <vector>

namespace sidgp {

/// E[k(W, b)] for W ~ N(belief.mean, belief.variance), one input dimension.
double expect_k(KernelFamily family, double range, const GaussianBelief& belief,
                double b);

/// E[k(W, a) k(W, b)] for W ~ N(belief.mean, belief.variance).
double expect_kk(KernelFamily family, double range, const GaussianBelief& belief,
                 double a, double b);

/// The kernel-expectation vector I and matrix J of a node whose input
/// columns carry independent Gaussian beliefs.
struct LinkedTerms {
  Vector expect_r;   // I_i = prod_d E[k_d(W_d, w_id)]
  Matrix expect_rr;  // J_ij = prod_d E[k_d(W_d, w_id) k_d(W_d, w_jd)]
};

/// `beliefs` has one entry per input column of `node` (deterministic
/// columns carry zero variance). J is exactly symmetric.
LinkedTerms linked_terms(const GPNode& node, std::span<const GaussianBelief> beliefs);

/// Mean and variance of the node output when its first beliefs.size() input
/// columns are Gaussian and the remaining columns take the exact values in
/// `deterministic` (the global-input connection).
///
/// Small negative variances from round-off are clamped to zero and reported
/// to `diag`; variances more negative than the round-off bound throw
/// NumericFailure.
GaussianBelief linked_predict(const GPNode& node,
                              std::span<const GaussianBelief> beliefs,
                              const Eigen::Ref<const Vector>& deterministic = Vector(),
                              Diagnostics* diag = nullptr);

/// One conditioned GP per node and layer. Layer 0 consumes the global input;
/// layer l > 0 consumes every output of layer l-1, followed by the global
/// input when `input_connected`.
struct LinkedNetwork {
  std::vector<std::vector<GPNode>> layers;
  bool input_connected = false;
};

/// Beliefs of the final-layer outputs at global input x0, propagated layer
/// by layer: gp_predict on layer 0, linked_predict afterwards.
std::vector<GaussianBelief> propagate_layers(const LinkedNetwork& network,
                                             const Eigen::Ref<const Vector>& x0,
                                             Diagnostics* diag = nullptr);

}  // namespace sidgp

#endif  // SIDGP_LINKED_HPP
