#include "sidgp/bench/problems.hpp"
#include "sidgp/emulator.hpp"
#include "sidgp/fit.hpp"
#include "sidgp/linked.hpp"
#include "sidgp/sampler.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace sidgp;

namespace {

KernelSpec kernel(Eigen::Index dims, double range) {
  KernelSpec k;
  k.ranges = Vector::Constant(dims, range);
  k.nugget = 1e-6;
  return k;
}

Matrix design(Eigen::Index m, Eigen::Index dims) { return bench::lhs_sample(m, dims, 7); }

Vector response(const Matrix& x) {
  Vector y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = std::sin(3.0 * x.row(i).sum());
  return y;
}

void BM_CorrelationMatrix(benchmark::State& state) {
  const Matrix x = design(state.range(0), 5);
  const KernelSpec k = kernel(5, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_matrix(k, x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CorrelationMatrix)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_LinkedPredict(benchmark::State& state) {
  const Matrix w = design(state.range(0), 3);
  const GPNode node(w, response(w), kernel(3, 0.5));
  const std::vector<GaussianBelief> beliefs{{0.4, 0.01}, {0.5, 0.02}, {0.6, 0.0}};
  for (auto _ : state) benchmark::DoNotOptimize(linked_predict(node, beliefs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LinkedPredict)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_GibbsSweep(benchmark::State& state) {
  Architecture arch;
  arch.nodes_per_layer = {2, 1};
  arch.input_dims = 2;
  TrainingData data;
  data.x = design(state.range(0), 2);
  data.y = response(data.x);
  Rng rng(1);
  LatentState latent = initial_state(arch, data, rng);
  const NetworkParams params{{kernel(2, 0.5), kernel(2, 0.5)}, {kernel(2, 1.0)}};
  for (auto _ : state) latent = gibbs_sweep(arch, data, std::move(latent), params, rng);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GibbsSweep)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_FitNode(benchmark::State& state) {
  const Matrix x = design(state.range(0), 5);
  const Vector y = response(x);
  FitOptions options;
  options.starts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_node(x, y, kernel(5, 0.5), options));
}
BENCHMARK(BM_FitNode)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PredictStep(benchmark::State& state) {
  TrainingData data;
  data.x = bench::step_training_inputs();
  data.y.resize(data.x.rows(), 1);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) data.y(i, 0) = bench::step_function(data.x(i, 0));
  Architecture arch;
  arch.nodes_per_layer = {1, 1, 1};
  EmulatorConfig config;
  config.training.iterations = 20;
  config.training.burn_in = 10;
  const TrainedEmulator model = train(data, arch, config);
  const Matrix x0 = bench::step_test_inputs();
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, x0));
}
BENCHMARK(BM_PredictStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
