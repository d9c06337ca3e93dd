#include "sidgp/linked.hpp"

#include "sidgp/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sidgp {

double expect_k(KernelFamily family, double range, const GaussianBelief& belief,
                double b) {
  switch (family) {
    case KernelFamily::SquaredExponential: {
      const double g2 = range * range;
      const double v = belief.variance;
      const double d = belief.mean - b;
      return std::exp(-d * d / (g2 + 2.0 * v)) / std::sqrt(1.0 + 2.0 * v / g2);
    }
  }
  throw ContractViolation("expect_k: unsupported kernel family");
}

double expect_kk(KernelFamily family, double range, const GaussianBelief& belief,
                 double a, double b) {
  switch (family) {
    case KernelFamily::SquaredExponential: {
      const double g2 = range * range;
      const double v = belief.variance;
      const double ab = a - b;
      const double c = belief.mean - 0.5 * (a + b);
      return std::exp(-ab * ab / (2.0 * g2) - 2.0 * c * c / (g2 + 4.0 * v)) /
             std::sqrt(1.0 + 4.0 * v / g2);
    }
  }
  throw ContractViolation("expect_kk: unsupported kernel family");
}

namespace {

void check_width(const GPNode& node, std::size_t n_beliefs, Eigen::Index n_det) {
  if (static_cast<Eigen::Index>(n_beliefs) + n_det != node.input_dims()) {
    throw ContractViolation(node.label() + ": node has " +
                            std::to_string(node.input_dims()) + " inputs but got " +
                            std::to_string(n_beliefs) + " beliefs and " +
                            std::to_string(n_det) + " deterministic values");
  }
}

// Squared-exponential I and J via per-dimension exponents summed before a
// single exp per entry. Algebraically identical to the product of
// expect_k / expect_kk over dimensions.
LinkedTerms sexp_terms(const GPNode& node, std::span<const GaussianBelief> beliefs) {
  const KernelSpec& kernel = node.kernel();
  const Matrix& w = node.inputs();
  const Eigen::Index m = w.rows();
  const Eigen::Index dims = w.cols();

  double log_ci = 0.0;
  double log_cj = 0.0;
  Vector inv_two_g2(dims), inv_si(dims), inv_two_sj(dims);
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double g2 = kernel.range(d) * kernel.range(d);
    const double v = beliefs[d].variance;
    log_ci -= 0.5 * std::log1p(2.0 * v / g2);
    log_cj -= 0.5 * std::log1p(4.0 * v / g2);
    inv_two_g2(d) = 1.0 / (2.0 * g2);
    inv_si(d) = 1.0 / (g2 + 2.0 * v);
    inv_two_sj(d) = 1.0 / (2.0 * (g2 + 4.0 * v));
  }

  // delta(i, d) = m_d - w_id
  Matrix delta(m, dims);
  for (Eigen::Index d = 0; d < dims; ++d) {
    delta.col(d) = beliefs[d].mean - w.col(d).array();
  }

  LinkedTerms out;
  out.expect_r.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double e = 0.0;
    for (Eigen::Index d = 0; d < dims; ++d) {
      e += delta(i, d) * delta(i, d) * inv_si(d);
    }
    out.expect_r(i) = std::exp(log_ci - e);
  }

  // -(a-b)^2/(2 g^2) - (2m - a - b)^2 / (2 (g^2 + 4v)) per dimension.
  out.expect_rr.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j; i < m; ++i) {
      double e = 0.0;
      for (Eigen::Index d = 0; d < dims; ++d) {
        const double ab = w(i, d) - w(j, d);
        const double s = delta(i, d) + delta(j, d);
        e += ab * ab * inv_two_g2(d) + s * s * inv_two_sj(d);
      }
      const double v = std::exp(log_cj - e);
      out.expect_rr(i, j) = v;
      out.expect_rr(j, i) = v;
    }
  }
  return out;
}

}  // namespace

LinkedTerms linked_terms(const GPNode& node, std::span<const GaussianBelief> beliefs) {
  check_width(node, beliefs.size(), 0);
  for (const auto& b : beliefs) {
    if (!(b.variance >= 0.0)) {
      throw ContractViolation(node.label() + ": belief variance must be >= 0");
    }
  }
  switch (node.kernel().family) {
    case KernelFamily::SquaredExponential:
      return sexp_terms(node, beliefs);
  }
  throw ContractViolation("linked_terms: unsupported kernel family");
}

GaussianBelief linked_predict(const GPNode& node,
                              std::span<const GaussianBelief> beliefs,
                              const Eigen::Ref<const Vector>& deterministic,
                              Diagnostics* diag) {
  check_width(node, beliefs.size(), deterministic.size());

  std::vector<GaussianBelief> all(beliefs.begin(), beliefs.end());
  for (Eigen::Index d = 0; d < deterministic.size(); ++d) {
    all.push_back({deterministic(d), 0.0});
  }
  const LinkedTerms terms = linked_terms(node, all);
  const Vector& alpha = node.weights();
  const Matrix& rinv = node.inverse_correlation();
  const double sigma2 = node.kernel().variance;

  GaussianBelief out;
  out.mean = terms.expect_r.dot(alpha);
  const double second_moment = alpha.dot(terms.expect_rr * alpha);
  const double trace = (rinv.array() * terms.expect_rr.array()).sum();
  const double var = second_moment - out.mean * out.mean +
                     sigma2 * (1.0 + node.kernel().nugget - trace);

  if (!std::isfinite(out.mean) || !std::isfinite(var)) {
    throw NumericFailure(node.label() + ": non-finite linked moments");
  }
  if (var >= 0.0) {
    out.variance = var;
    return out;
  }

  // Floating-point bound on the cancellation in the variance expression.
  const Vector abs_alpha = alpha.cwiseAbs();
  const double magnitude =
      abs_alpha.dot(terms.expect_rr * abs_alpha) +
      sigma2 * (rinv.cwiseAbs().array() * terms.expect_rr.array()).sum() +
      out.mean * out.mean + sigma2;
  const double tolerance =
      1e-9 * sigma2 + 1e3 * std::numeric_limits<double>::epsilon() * magnitude;
  if (var < -tolerance) {
    throw NumericFailure(node.label() + ": linked variance " + std::to_string(var) +
                         " is below the round-off tolerance -" +
                         std::to_string(tolerance));
  }
  if (diag) {
    diag->warn("linked_variance_clamped",
               node.label() + ": variance " + std::to_string(var) + " clamped to 0");
  }
  out.variance = 0.0;
  return out;
}

std::vector<GaussianBelief> propagate_layers(const LinkedNetwork& network,
                                             const Eigen::Ref<const Vector>& x0,
                                             Diagnostics* diag) {
  if (network.layers.empty()) {
    throw ContractViolation("propagate_layers: empty network");
  }
  std::vector<GaussianBelief> current;
  for (std::size_t l = 0; l < network.layers.size(); ++l) {
    std::vector<GaussianBelief> next;
    next.reserve(network.layers[l].size());
    for (std::size_t p = 0; p < network.layers[l].size(); ++p) {
      const GPNode& node = network.layers[l][p];
      GaussianBelief b;
      if (l == 0) {
        b = gp_predict(node, x0);
      } else if (network.input_connected) {
        b = linked_predict(node, current, x0, diag);
      } else {
        b = linked_predict(node, current, Vector(), diag);
      }
      if (!std::isfinite(b.mean) || !std::isfinite(b.variance)) {
        throw NumericFailure("non-finite prediction at layer " + std::to_string(l + 1) +
                             ", node " + std::to_string(p + 1));
      }
      next.push_back(b);
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace sidgp
