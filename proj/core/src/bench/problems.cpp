#include "sidgp/bench/problems.hpp"

#include "sidgp/error.hpp"
#include "sidgp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sidgp::bench {

double step_function(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw ContractViolation("step_function: x = " + std::to_string(x) +
                            " is outside [0, 1)");
  }
  return x < 0.5 ? -1.0 : 1.0;
}

double function_5d(const Eigen::Ref<const Vector>& x) {
  if (x.size() != 5) throw ContractViolation("function_5d: expected 5 inputs");
  double exponent = 0.0;
  bool positive = true;
  for (Eigen::Index i = 0; i < 5; ++i) {
    if (!(x(i) >= 0.0 && x(i) <= 1.0)) {
      throw ContractViolation("function_5d: input outside [0, 1]^5");
    }
    positive = positive && x(i) > 0.2;
    const double w = 1.0 / static_cast<double>(i + 1);
    exponent += w * w * x(i);
  }
  return positive ? std::exp(exponent) : 0.0;
}

Matrix lhs_sample(Eigen::Index n, Eigen::Index dims,
                  const std::vector<std::pair<double, double>>& bounds,
                  std::uint64_t seed) {
  if (n < 1) throw ContractViolation("lhs_sample: n must be >= 1");
  if (dims < 1) throw ContractViolation("lhs_sample: dims must be >= 1");
  if (static_cast<Eigen::Index>(bounds.size()) != dims) {
    throw ContractViolation("lhs_sample: need one (lower, upper) pair per dimension");
  }
  Rng rng = split_rng(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix out(n, dims);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < dims; ++d) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(d)];
    if (!(hi > lo)) throw ContractViolation("lhs_sample: empty interval");
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (hi - lo) / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto bin = static_cast<double>(perm[static_cast<std::size_t>(i)]);
      // Keep the point inside its bin after rounding.
      const double v = lo + (bin + unif(rng)) * width;
      const double bin_lo = lo + bin * width;
      const double bin_hi = std::nextafter(lo + (bin + 1.0) * width, bin_lo);
      out(i, d) = std::clamp(v, bin_lo, bin_hi);
    }
  }
  return out;
}

Matrix lhs_sample(Eigen::Index n, Eigen::Index dims, std::uint64_t seed) {
  return lhs_sample(n, dims,
                    std::vector<std::pair<double, double>>(static_cast<std::size_t>(dims),
                                                           {0.0, 1.0}),
                    seed);
}

double nrmsep(const Eigen::Ref<const Vector>& truth, const Eigen::Ref<const Vector>& means) {
  if (truth.size() != means.size()) {
    throw ContractViolation("nrmsep: truth and means differ in length");
  }
  if (truth.size() < 2) throw ContractViolation("nrmsep: need at least 2 points");
  const double range = truth.maxCoeff() - truth.minCoeff();
  if (!(range > 0.0)) {
    throw ContractViolation("nrmsep: truth has zero range, metric undefined");
  }
  const double mse = (truth - means).squaredNorm() / static_cast<double>(truth.size());
  return std::sqrt(mse) / range;
}

Vector linspace(double a, double b, Eigen::Index n) {
  if (n < 1) throw ContractViolation("linspace: n must be >= 1");
  Vector out(n);
  if (n == 1) {
    out(0) = a;
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out(n - 1) = b;
  return out;
}

Vector step_training_inputs(Eigen::Index n) {
  return linspace(0.0, std::nextafter(1.0, 0.0), n);
}

Vector step_test_inputs(Eigen::Index n) {
  if (n < 1) throw ContractViolation("step_test_inputs: n must be >= 1");
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = static_cast<double>(i) / static_cast<double>(n);
  }
  return out;
}

}  // namespace sidgp::bench
