#ifndef SIDGP_KERNEL_HPP
#define SIDGP_KERNEL_HPP

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace sidgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelFamily { SquaredExponential };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Hyperparameters of one GP node.
///
/// The correlation between rows a and b is
///   prod_d k_d(|a_d - b_d|) + nugget * 1{a == b}
/// and the covariance is variance times that. For the squared exponential
/// family k_d(r) = exp(-r^2 / range_d^2).
///
/// `ranges` has one entry per input dimension, or a single entry when the
/// node shares one range across all of its inputs.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double variance = 1.0;
  double nugget = 1e-6;
  Vector ranges;

  bool shared_range() const { return ranges.size() == 1; }
  double range(Eigen::Index dim) const {
    return shared_range() ? ranges(0) : ranges(dim);
  }

  /// Throws ContractViolation unless variance > 0, nugget >= 0, ranges > 0.
  void validate() const;
  /// Throws ContractViolation unless the kernel can act on `dims` inputs.
  void check_dims(Eigen::Index dims) const;

  bool operator==(const KernelSpec&) const = default;
};

/// One-dimensional correlation k_d(|a - b|) for a range `range`.
double kernel_1d(KernelFamily family, double range, double a, double b);

/// prod_d k_d(|a_d - b_d|). Excludes variance and nugget.
double kernel_eval(const KernelSpec& kernel, const Eigen::Ref<const Vector>& a,
                   const Eigen::Ref<const Vector>& b);

/// Correlation matrix R(X) of the rows of `inputs`, nugget included on
/// every pair of bitwise-equal rows. The result is exactly symmetric.
Matrix correlation_matrix(const KernelSpec& kernel, const Matrix& inputs);

/// Cross-correlation r_i = k(x0, X_i) for every row of `inputs`.
Vector cross_correlation(const KernelSpec& kernel, const Matrix& inputs,
                         const Eigen::Ref<const Vector>& x0);

/// Indicator matrix of bitwise-equal rows (ones on the diagonal).
Matrix duplicate_indicator(const Matrix& inputs);

}  // namespace sidgp

#endif  // SIDGP_KERNEL_HPP
