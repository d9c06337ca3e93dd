#include "sidgp/fit.hpp"

#include "sidgp/error.hpp"
#include "sidgp/gp_node.hpp"
#include "sidgp/rng.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

namespace sidgp {

namespace {

// W-weighted sum of dR/dlog(range) for every range parameter, i.e.
// grad_k = -1/2 sum_ij W_ij dR_ij/dlog(range_k).
Vector range_gradient(const KernelSpec& kernel, const Matrix& inputs,
                      const Matrix& weight, const Matrix& corr_no_nugget) {
  const Eigen::Index m = inputs.rows();
  const Eigen::Index dims = inputs.cols();
  Vector grad = Vector::Zero(kernel.ranges.size());
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double range = kernel.range(d);
    const double scale = 2.0 / (range * range);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = j + 1; i < m; ++i) {
        const double diff = inputs(i, d) - inputs(j, d);
        acc += 2.0 * weight(i, j) * corr_no_nugget(i, j) * diff * diff * scale;
      }
    }
    grad(kernel.shared_range() ? 0 : d) += -0.5 * acc;
  }
  return grad;
}

Matrix strip_nugget(const KernelSpec& kernel, const Matrix& inputs, Matrix corr) {
  if (kernel.nugget != 0.0) corr -= kernel.nugget * duplicate_indicator(inputs);
  return corr;
}

void silence_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct Problem {
  const Matrix* inputs = nullptr;
  const Vector* outputs = nullptr;
  const FitOptions* options = nullptr;
  KernelSpec base;
  Eigen::Index n_ranges = 0;

  // Best point seen across every evaluation.
  double best_value = -std::numeric_limits<double>::infinity();
  Vector best_params;
  double best_variance = 0.0;
  int evaluations = 0;

  Vector lower, upper;

  KernelSpec kernel_at(const Vector& params) const {
    KernelSpec k = base;
    for (Eigen::Index i = 0; i < n_ranges; ++i) k.ranges(i) = std::exp(params(i));
    if (options->estimate_nugget) k.nugget = std::exp(params(n_ranges));
    return k;
  }

  Vector clamp(const Vector& params) const {
    return params.cwiseMax(lower).cwiseMin(upper);
  }

  // Negative profile log likelihood at the clamped point; the gradient is
  // zeroed on coordinates that sit outside the box.
  double evaluate(const Vector& raw, Vector* grad) {
    ++evaluations;
    const Vector params = clamp(raw);
    double variance_hat = 0.0;
    Vector g;
    double value;
    try {
      value = profile_log_likelihood(kernel_at(params), *inputs, *outputs,
                                     *options, grad ? &g : nullptr, &variance_hat);
    } catch (const SingularMatrixError&) {
      if (grad) grad->setZero(raw.size());
      return 1e300;
    }
    if (!std::isfinite(value)) {
      if (grad) grad->setZero(raw.size());
      return 1e300;
    }
    if (value > best_value) {
      best_value = value;
      best_params = params;
      best_variance = variance_hat;
    }
    if (grad) {
      *grad = -g;
      for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (raw(i) < lower(i) || raw(i) > upper(i)) (*grad)(i) = 0.0;
      }
    }
    return -value;
  }
};

Vector from_gsl(const gsl_vector* v) {
  Vector out(v->size);
  for (std::size_t i = 0; i < v->size; ++i) out(i) = gsl_vector_get(v, i);
  return out;
}

double gsl_f(const gsl_vector* x, void* p) {
  return static_cast<Problem*>(p)->evaluate(from_gsl(x), nullptr);
}

void gsl_df(const gsl_vector* x, void* p, gsl_vector* g) {
  Vector grad;
  static_cast<Problem*>(p)->evaluate(from_gsl(x), &grad);
  for (Eigen::Index i = 0; i < grad.size(); ++i) gsl_vector_set(g, i, grad(i));
}

void gsl_fdf(const gsl_vector* x, void* p, double* f, gsl_vector* g) {
  Vector grad;
  *f = static_cast<Problem*>(p)->evaluate(from_gsl(x), &grad);
  for (Eigen::Index i = 0; i < grad.size(); ++i) gsl_vector_set(g, i, grad(i));
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fdfminimizer* m) const {
    gsl_multimin_fdfminimizer_free(m);
  }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

// Runs BFGS from `start`; returns true if the gradient test passed.
bool run_bfgs(Problem& problem, const Vector& start) {
  const auto n = static_cast<std::size_t>(start.size());
  gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, n, &problem};
  std::unique_ptr<gsl_multimin_fdfminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n));
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, start(i));

  if (gsl_multimin_fdfminimizer_set(minimizer.get(), &fdf, x.get(), 0.1, 0.1) !=
      GSL_SUCCESS) {
    return false;
  }
  for (int iter = 0; iter < problem.options->max_iterations; ++iter) {
    if (gsl_multimin_fdfminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
      // No further progress possible; treat a small gradient as converged.
      return gsl_multimin_test_gradient(minimizer.get()->gradient,
                                        problem.options->gradient_tolerance *
                                            10.0) == GSL_SUCCESS;
    }
    if (gsl_multimin_test_gradient(minimizer.get()->gradient,
                                   problem.options->gradient_tolerance) ==
        GSL_SUCCESS) {
      return true;
    }
  }
  return false;
}

}  // namespace

double log_likelihood_and_gradient(const KernelSpec& kernel, const Matrix& inputs,
                                   const Eigen::Ref<const Vector>& outputs,
                                   Vector* grad_log_ranges) {
  kernel.validate();
  const Matrix corr = correlation_matrix(kernel, inputs);
  const Factorization fact = factorize(corr, "log_likelihood_and_gradient");
  const double value = log_normal_density(fact, outputs, kernel.variance);
  if (grad_log_ranges) {
    const Eigen::Index m = inputs.rows();
    const Vector alpha = fact.llt.solve(outputs);
    const Matrix weight = fact.llt.solve(Matrix::Identity(m, m)) -
                          alpha * alpha.transpose() / kernel.variance;
    *grad_log_ranges =
        range_gradient(kernel, inputs, weight, strip_nugget(kernel, inputs, corr));
  }
  return value;
}

double profile_log_likelihood(const KernelSpec& kernel, const Matrix& inputs,
                              const Eigen::Ref<const Vector>& outputs,
                              const FitOptions& options, Vector* grad,
                              double* variance_hat) {
  const Eigen::Index m = inputs.rows();
  const Matrix corr = correlation_matrix(kernel, inputs);
  const Factorization fact = factorize(corr, "profile_log_likelihood");
  const Vector alpha = fact.llt.solve(outputs);
  const double quad = outputs.dot(alpha);
  const double sigma2 =
      options.estimate_variance
          ? std::max(quad / static_cast<double>(m), options.variance_lower)
          : kernel.variance;
  if (variance_hat) *variance_hat = sigma2;

  const double value =
      -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi * sigma2) +
              fact.log_det() + quad / sigma2);

  if (grad) {
    const Matrix weight =
        fact.llt.solve(Matrix::Identity(m, m)) - alpha * alpha.transpose() / sigma2;
    const Vector gr =
        range_gradient(kernel, inputs, weight, strip_nugget(kernel, inputs, corr));
    grad->resize(gr.size() + (options.estimate_nugget ? 1 : 0));
    grad->head(gr.size()) = gr;
    if (options.estimate_nugget) {
      // dR/dlog(eta) = eta * duplicate indicator.
      const Matrix ind = duplicate_indicator(inputs);
      (*grad)(gr.size()) = -0.5 * kernel.nugget * (weight.array() * ind.array()).sum();
    }
  }
  return value;
}

FitResult fit_node(const Matrix& inputs, const Eigen::Ref<const Vector>& outputs,
                   const KernelSpec& init, const FitOptions& options) {
  silence_gsl();
  if (inputs.rows() != outputs.size()) {
    throw ContractViolation("fit_node: row count mismatch");
  }
  if (inputs.rows() < 2) {
    throw ContractViolation("fit_node: need at least two observations");
  }
  init.validate();
  init.check_dims(inputs.cols());

  const Vector y = outputs;
  Problem problem;
  problem.inputs = &inputs;
  problem.outputs = &y;
  problem.options = &options;
  problem.base = init;
  problem.n_ranges = init.ranges.size();
  const Eigen::Index n = problem.n_ranges + (options.estimate_nugget ? 1 : 0);
  problem.lower.resize(n);
  problem.upper.resize(n);
  problem.lower.head(problem.n_ranges).setConstant(std::log(options.range_lower));
  problem.upper.head(problem.n_ranges).setConstant(std::log(options.range_upper));
  if (options.estimate_nugget) {
    problem.lower(n - 1) = std::log(options.nugget_lower);
    problem.upper(n - 1) = std::log(options.nugget_upper);
  }

  FitResult result;
  try {
    result.initial_log_likelihood =
        log_marginal_likelihood(init, inputs, y, "fit_node(init)");
  } catch (const SingularMatrixError&) {
    result.initial_log_likelihood = -std::numeric_limits<double>::infinity();
  }

  Vector start(n);
  start.head(problem.n_ranges) = init.ranges.array().log();
  if (options.estimate_nugget) {
    start(n - 1) = std::log(std::max(init.nugget, options.nugget_lower));
  }
  start = problem.clamp(start);

  Rng rng = split_rng(options.seed, 0xf17);
  std::normal_distribution<double> normal(0.0, options.start_jitter);
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    Vector x0 = start;
    if (s > 0) {
      for (Eigen::Index i = 0; i < n; ++i) x0(i) += normal(rng);
      x0 = problem.clamp(x0);
    }
    const bool ok = run_bfgs(problem, x0);
    result.converged = result.converged || ok;
  }
  result.evaluations = problem.evaluations;

  if (problem.best_params.size() == 0 ||
      problem.best_value < result.initial_log_likelihood) {
    // Nothing better than the starting kernel was found.
    result.kernel = init;
    result.log_likelihood = result.initial_log_likelihood;
    result.converged = false;
    return result;
  }
  result.kernel = problem.kernel_at(problem.best_params);
  result.kernel.variance = problem.best_variance;
  result.log_likelihood = problem.best_value;
  return result;
}

}  // namespace sidgp
