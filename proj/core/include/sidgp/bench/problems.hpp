#ifndef SIDGP_BENCH_PROBLEMS_HPP
#define SIDGP_BENCH_PROBLEMS_HPP

#include "sidgp/kernel.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sidgp::bench {

/// -1 on [0, 0.5), +1 on [0.5, 1). Throws ContractViolation elsewhere.
double step_function(double x);

/// exp(sum_i x_i / i^2) when every x_i > 0.2, otherwise 0. Domain [0, 1]^5.
double function_5d(const Eigen::Ref<const Vector>& x);

/// Latin hypercube design: each column puts exactly one point in each of n
/// equal-width bins of its interval, at a uniform position inside the bin.
Matrix lhs_sample(Eigen::Index n, Eigen::Index dims,
                  const std::vector<std::pair<double, double>>& bounds,
                  std::uint64_t seed);

/// Unit-cube overload.
Matrix lhs_sample(Eigen::Index n, Eigen::Index dims, std::uint64_t seed);

/// Root mean squared error divided by the range of `truth`.
double nrmsep(const Eigen::Ref<const Vector>& truth, const Eigen::Ref<const Vector>& means);

/// n equally spaced values from a to b inclusive.
Vector linspace(double a, double b, Eigen::Index n);

/// Step-problem designs: training points cover [0, 1) with both ends of the
/// domain represented (0 and the largest double below 1); test points are
/// i/n for i = 0..n-1.
Vector step_training_inputs(Eigen::Index n = 10);
Vector step_test_inputs(Eigen::Index n = 200);

}  // namespace sidgp::bench

#endif  // SIDGP_BENCH_PROBLEMS_HPP
