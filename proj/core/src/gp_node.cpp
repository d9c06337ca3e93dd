#include "sidgp/gp_node.hpp"

#include "sidgp/error.hpp"

#include <cmath>
#include <numbers>

namespace sidgp {

double Factorization::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

std::optional<Factorization> try_factorize(const Matrix& correlation) {
  Factorization fact;
  fact.llt.compute(correlation);
  if (fact.llt.info() == Eigen::Success) return fact;

  const double scale = correlation.diagonal().mean();
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * scale;
    Matrix jittered = correlation;
    jittered.diagonal().array() += jitter;
    fact.llt.compute(jittered);
    if (fact.llt.info() == Eigen::Success) {
      fact.jitter = jitter;
      return fact;
    }
  }
  return std::nullopt;
}

Factorization factorize(const Matrix& correlation, const std::string& what) {
  auto fact = try_factorize(correlation);
  if (!fact) {
    throw SingularMatrixError("correlation matrix of " + what +
                              " is not positive definite (jitter up to 1e-4 "
                              "failed)");
  }
  return std::move(*fact);
}

double log_normal_density(const Factorization& fact,
                          const Eigen::Ref<const Vector>& y, double variance) {
  const auto m = static_cast<double>(y.size());
  const Vector z = fact.llt.matrixL().solve(y);
  return -0.5 * (m * std::log(2.0 * std::numbers::pi * variance) +
                 fact.log_det() + z.squaredNorm() / variance);
}

GPNode::GPNode(Matrix inputs, Vector outputs, KernelSpec kernel, std::string label)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      kernel_(std::move(kernel)),
      label_(std::move(label)) {
  if (inputs_.rows() != outputs_.size()) {
    throw ContractViolation(label_ + ": " + std::to_string(inputs_.rows()) +
                            " input rows but " + std::to_string(outputs_.size()) +
                            " outputs");
  }
  if (!inputs_.allFinite() || !outputs_.allFinite()) {
    throw ContractViolation(label_ + ": inputs and outputs must be finite");
  }
  kernel_.validate();
  kernel_.check_dims(inputs_.cols());
  fact_ = factorize(correlation_matrix(kernel_, inputs_), label_);
  weights_ = fact_.llt.solve(outputs_);
  inverse_ = fact_.llt.solve(Matrix::Identity(inputs_.rows(), inputs_.rows()));
  // Symmetrize away solve round-off so tr(R^-1 J) sees a symmetric matrix.
  inverse_ = 0.5 * (inverse_ + inverse_.transpose()).eval();
}

double log_marginal_likelihood(const GPNode& node) {
  return log_normal_density(node.factorization(), node.outputs(),
                            node.kernel().variance);
}

double log_marginal_likelihood(const KernelSpec& kernel, const Matrix& inputs,
                               const Eigen::Ref<const Vector>& outputs,
                               const std::string& what) {
  if (inputs.rows() != outputs.size()) {
    throw ContractViolation(what + ": row count mismatch");
  }
  kernel.validate();
  const Factorization fact = factorize(correlation_matrix(kernel, inputs), what);
  return log_normal_density(fact, outputs, kernel.variance);
}

GaussianBelief gp_predict(const GPNode& node, const Eigen::Ref<const Vector>& x0) {
  const Vector r = cross_correlation(node.kernel(), node.inputs(), x0);
  const Vector z = node.factorization().llt.matrixL().solve(r);
  GaussianBelief out;
  out.mean = r.dot(node.weights());
  const double var =
      node.kernel().variance * (1.0 + node.kernel().nugget - z.squaredNorm());
  out.variance = var > 0.0 ? var : 0.0;
  return out;
}

}  // namespace sidgp
