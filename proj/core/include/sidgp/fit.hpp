#ifndef SIDGP_FIT_HPP
#define SIDGP_FIT_HPP

#include "sidgp/kernel.hpp"

#include <cstdint>

namespace sidgp {

struct FitOptions {
  /// Number of optimizer starts. The first starts from the initial kernel,
  /// the others from log-scale jitters of it.
  int starts = 2;
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  /// Standard deviation of the log-scale jitter applied to extra starts.
  double start_jitter = 0.5;
  std::uint64_t seed = 0;

  /// When false the variance is held at the initial kernel's value.
  bool estimate_variance = true;
  bool estimate_nugget = false;
  double nugget_lower = 1e-8;
  double nugget_upper = 1.0;

  double range_lower = 1e-3;
  double range_upper = 1e3;
  double variance_lower = 1e-12;

  bool operator==(const FitOptions&) const = default;
};

struct FitResult {
  KernelSpec kernel;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// log N(y; 0, variance * R) and, if `grad_log_ranges` is non-null, its
/// gradient with respect to log(range_d) at fixed variance and nugget.
double log_likelihood_and_gradient(const KernelSpec& kernel, const Matrix& inputs,
                                   const Eigen::Ref<const Vector>& outputs,
                                   Vector* grad_log_ranges);

/// Log likelihood with the variance replaced by its maximizer
/// max(y' R^-1 y / M, variance_lower), or held at kernel.variance when
/// !options.estimate_variance. Gradient is with respect to
/// (log ranges..., log nugget if estimate_nugget).
double profile_log_likelihood(const KernelSpec& kernel, const Matrix& inputs,
                              const Eigen::Ref<const Vector>& outputs,
                              const FitOptions& options, Vector* grad,
                              double* variance_hat);

/// Maximum likelihood fit of the ranges (and optionally the nugget) of a
/// zero-mean GP, with the variance profiled out in closed form (or fixed).
///
/// Never throws on optimizer trouble: the best point evaluated is returned
/// with `converged == false`. The returned log likelihood is never below the
/// log likelihood of `init`.
FitResult fit_node(const Matrix& inputs, const Eigen::Ref<const Vector>& outputs,
                   const KernelSpec& init, const FitOptions& options);

}  // namespace sidgp

#endif  // SIDGP_FIT_HPP
