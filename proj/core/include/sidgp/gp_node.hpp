#ifndef SIDGP_GP_NODE_HPP
#define SIDGP_GP_NODE_HPP

#include "sidgp/kernel.hpp"

#include <optional>
#include <string>

namespace sidgp {

struct GaussianBelief {
  double mean = 0.0;
  double variance = 0.0;

  bool operator==(const GaussianBelief&) const = default;
};

/// Cholesky factorization of a correlation matrix, together with the
/// diagonal jitter that had to be added for it to succeed (0 if none).
struct Factorization {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;

  double log_det() const;
};

/// Factorizes R, escalating jitter 1e-10 * mean(diag) by x10 up to 1e-4 *
/// mean(diag). Returns nullopt if every attempt fails.
std::optional<Factorization> try_factorize(const Matrix& correlation);

/// As try_factorize but throws SingularMatrixError mentioning `what`.
Factorization factorize(const Matrix& correlation, const std::string& what);

/// log N(y; 0, variance * R) given a factorization of R.
double log_normal_density(const Factorization& fact,
                          const Eigen::Ref<const Vector>& y, double variance);

/// A zero-mean GP conditioned on (inputs, outputs) under a fixed kernel.
///
/// Construction factorizes R(inputs) and caches the factor, R^-1 y and R^-1
/// (the latter is needed by the linked-GP variance). Immutable afterwards and
/// safe to share across threads.
class GPNode {
 public:
  GPNode(Matrix inputs, Vector outputs, KernelSpec kernel,
         std::string label = "gp");

  const Matrix& inputs() const { return inputs_; }
  const Vector& outputs() const { return outputs_; }
  const KernelSpec& kernel() const { return kernel_; }
  const std::string& label() const { return label_; }

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index input_dims() const { return inputs_.cols(); }

  /// Lower-triangular Cholesky factor of R(inputs) (+ jitter).
  Matrix lower_factor() const { return fact_.llt.matrixL(); }
  const Factorization& factorization() const { return fact_; }
  /// R^-1 y.
  const Vector& weights() const { return weights_; }
  /// R^-1, obtained from the Cholesky solve against the identity.
  const Matrix& inverse_correlation() const { return inverse_; }
  double jitter() const { return fact_.jitter; }

 private:
  Matrix inputs_;
  Vector outputs_;
  KernelSpec kernel_;
  std::string label_;
  Factorization fact_;
  Vector weights_;
  Matrix inverse_;
};

/// log N(outputs; 0, sigma^2 R(inputs)).
double log_marginal_likelihood(const GPNode& node);
double log_marginal_likelihood(const KernelSpec& kernel, const Matrix& inputs,
                               const Eigen::Ref<const Vector>& outputs,
                               const std::string& what = "gp");

/// Posterior predictive of the node at a deterministic input x0.
/// Variance is clamped at zero from below.
GaussianBelief gp_predict(const GPNode& node, const Eigen::Ref<const Vector>& x0);

}  // namespace sidgp

#endif  // SIDGP_GP_NODE_HPP
