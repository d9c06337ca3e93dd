#include "sidgp/kernel.hpp"

#include "sidgp/error.hpp"

#include <cmath>
#include <string>

namespace sidgp {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "squared_exponential" || name == "sexp") {
    return KernelFamily::SquaredExponential;
  }
  throw ContractViolation("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ContractViolation("kernel variance must be positive and finite");
  }
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) {
    throw ContractViolation("kernel nugget must be non-negative and finite");
  }
  if (ranges.size() == 0) {
    throw ContractViolation("kernel needs at least one range parameter");
  }
  for (Eigen::Index d = 0; d < ranges.size(); ++d) {
    if (!(ranges(d) > 0.0) || !std::isfinite(ranges(d))) {
      throw ContractViolation("kernel ranges must be positive and finite");
    }
  }
}

void KernelSpec::check_dims(Eigen::Index dims) const {
  if (!shared_range() && ranges.size() != dims) {
    throw ContractViolation("kernel has " + std::to_string(ranges.size()) +
                            " ranges but input has " + std::to_string(dims) +
                            " dimensions");
  }
}

double kernel_1d(KernelFamily family, double range, double a, double b) {
  switch (family) {
    case KernelFamily::SquaredExponential: {
      const double r = (a - b) / range;
      return std::exp(-r * r);
    }
  }
  throw ContractViolation("unsupported kernel family");
}

namespace {

// Sum over dimensions of ((a_d - b_d) / range_d)^2.
inline double scaled_sq_distance(const KernelSpec& kernel, const double* a,
                                 const double* b, Eigen::Index stride_a,
                                 Eigen::Index stride_b, Eigen::Index dims) {
  double acc = 0.0;
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double r = (a[d * stride_a] - b[d * stride_b]) / kernel.range(d);
    acc += r * r;
  }
  return acc;
}

}  // namespace

double kernel_eval(const KernelSpec& kernel, const Eigen::Ref<const Vector>& a,
                   const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) {
    throw ContractViolation("kernel_eval: argument dimensions differ");
  }
  kernel.check_dims(a.size());
  switch (kernel.family) {
    case KernelFamily::SquaredExponential:
      return std::exp(-scaled_sq_distance(kernel, a.data(), b.data(), 1, 1, a.size()));
  }
  throw ContractViolation("unsupported kernel family");
}

Matrix correlation_matrix(const KernelSpec& kernel, const Matrix& inputs) {
  const Eigen::Index m = inputs.rows();
  const Eigen::Index dims = inputs.cols();
  if (m < 1) {
    throw ContractViolation("correlation_matrix: no input rows");
  }
  kernel.check_dims(dims);

  // Column-major storage: row i of `inputs` starts at data()+i with stride m.
  const double* base = inputs.data();
  Matrix r(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    r(j, j) = 1.0 + kernel.nugget;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      const double k = std::exp(
          -scaled_sq_distance(kernel, base + i, base + j, m, m, dims));
      const bool same = (inputs.row(i).array() == inputs.row(j).array()).all();
      const double v = same ? k + kernel.nugget : k;
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Vector cross_correlation(const KernelSpec& kernel, const Matrix& inputs,
                         const Eigen::Ref<const Vector>& x0) {
  const Eigen::Index m = inputs.rows();
  const Eigen::Index dims = inputs.cols();
  if (x0.size() != dims) {
    throw ContractViolation("cross_correlation: query has " +
                            std::to_string(x0.size()) + " dims, node has " +
                            std::to_string(dims));
  }
  kernel.check_dims(dims);
  Vector r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    r(i) = std::exp(
        -scaled_sq_distance(kernel, inputs.data() + i, x0.data(), m, 1, dims));
  }
  return r;
}

Matrix duplicate_indicator(const Matrix& inputs) {
  const Eigen::Index m = inputs.rows();
  Matrix ind = Matrix::Identity(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = j + 1; i < m; ++i) {
      if ((inputs.row(i).array() == inputs.row(j).array()).all()) {
        ind(i, j) = 1.0;
        ind(j, i) = 1.0;
      }
    }
  }
  return ind;
}

}  // namespace sidgp
