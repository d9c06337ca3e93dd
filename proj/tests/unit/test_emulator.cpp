#include "sidgp/bench/problems.hpp"
#include "sidgp/emulator.hpp"
#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace sidgp;

namespace {

TrainingData step_data() {
  TrainingData data;
  data.x = bench::step_training_inputs();
  data.y.resize(data.x.rows(), 1);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) data.y(i, 0) = bench::step_function(data.x(i, 0));
  return data;
}

EmulatorConfig small_config(std::uint64_t seed = 1) {
  EmulatorConfig c;
  c.training.iterations = 20;
  c.training.burn_in = 10;
  c.training.ess_sweeps = 5;
  c.training.seed = seed;
  c.training.initial_fit.seed = seed;
  c.training.refit.seed = seed;
  c.imputations = 6;
  c.thinning = 2;
  return c;
}

Architecture three_layers() {
  Architecture arch;
  arch.nodes_per_layer = {1, 1, 1};
  return arch;
}

const TrainedEmulator& step_model() {
  static const TrainedEmulator model = train(step_data(), three_layers(), small_config());
  return model;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sidgp_test_" + name);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(MixComponents, IdenticalComponentsReturnTheComponent) {
  const std::vector<GaussianBelief> c(7, GaussianBelief{0.3, 0.02});
  const GaussianBelief m = mix_components(c);
  EXPECT_NEAR(m.mean, 0.3, 1e-15);
  EXPECT_NEAR(m.variance, 0.02, 1e-15);
}

TEST(MixComponents, TwoPointMixture) {
  const std::vector<GaussianBelief> c{{-1.0, 0.5}, {1.0, 0.5}};
  const GaussianBelief m = mix_components(c);
  EXPECT_DOUBLE_EQ(m.mean, 0.0);
  EXPECT_DOUBLE_EQ(m.variance, 1.5);
}

TEST(MixComponents, SecondMomentIdentityAndPermutationInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GaussianBelief> c(50);
    for (auto& b : c) b = {n(rng) + 100.0, u(rng)};
    const GaussianBelief m = mix_components(c);
    long double second = 0.0L;
    for (const auto& b : c) second += static_cast<long double>(b.mean) * b.mean + b.variance;
    second /= c.size();
    const double combined = m.mean * m.mean + m.variance;
    EXPECT_NEAR(combined, static_cast<double>(second), 1e-10 * std::abs(combined));
    EXPECT_GE(m.variance, 0.0);
    std::shuffle(c.begin(), c.end(), rng);
    const GaussianBelief p = mix_components(c);
    EXPECT_NEAR(p.mean, m.mean, 1e-13 * std::abs(m.mean));
    EXPECT_NEAR(p.variance, m.variance, 1e-10 * m.variance + 1e-14);
  }
}

TEST(MixComponents, RejectsEmpty) {
  EXPECT_THROW(mix_components(std::vector<GaussianBelief>{}), ContractViolation);
}

TEST(Train, ProducesRequestedImputations) {
  const TrainedEmulator& m = step_model();
  EXPECT_EQ(m.imputations.size(), 6u);
  EXPECT_EQ(m.networks.size(), 6u);
  EXPECT_EQ(m.params.size(), 3u);
  EXPECT_EQ(m.data_digest, data_digest(m.data));
  for (const auto& s : m.imputations) EXPECT_EQ(s.hidden.size(), 2u);
  // Thinned draws from a moving chain are distinct.
  EXPECT_FALSE(m.imputations[0] == m.imputations[1]);
}

TEST(Train, IndependentChainsMode) {
  EmulatorConfig c = small_config(2);
  c.mode = ImputationMode::IndependentChains;
  c.imputations = 3;
  const TrainedEmulator m = train(step_data(), three_layers(), c);
  EXPECT_EQ(m.imputations.size(), 3u);
  const PredictionResult p = predict(m, bench::step_test_inputs(20));
  EXPECT_TRUE(p.mean.allFinite());
  EXPECT_GE(p.variance.minCoeff(), 0.0);
}

TEST(Predict, SingleImputationEqualsPropagatedLayers) {
  EmulatorConfig c = small_config(3);
  c.imputations = 1;
  const TrainedEmulator m = train(step_data(), three_layers(), c);
  const Matrix x0 = bench::step_test_inputs(25);
  const PredictionResult p = predict(m, x0);
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    const auto b = propagate_layers(m.networks[0], x0.row(i).transpose());
    EXPECT_EQ(p.mean(i, 0), b[0].mean);
    EXPECT_EQ(p.variance(i, 0), b[0].variance);
  }
}

TEST(Predict, ComponentsSatisfyMixtureIdentity) {
  const Matrix x0 = bench::step_test_inputs(50);
  const PredictionResult p = predict(step_model(), x0, {.keep_components = true});
  ASSERT_EQ(p.component_mean.size(), 6u);
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    double second = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      second += p.component_mean[k](i, 0) * p.component_mean[k](i, 0) +
                p.component_variance[k](i, 0);
    }
    second /= 6.0;
    const double combined = p.mean(i, 0) * p.mean(i, 0) + p.variance(i, 0);
    EXPECT_NEAR(combined, second, 1e-10 * std::max(std::abs(combined), 1e-300));
  }
}

TEST(Predict, ThreadCountDoesNotChangeResults) {
  const Matrix x0 = bench::step_test_inputs(40);
  const PredictionResult a = predict(step_model(), x0, {.threads = 1});
  const PredictionResult b = predict(step_model(), x0, {.threads = 3});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(Predict, SmoothOnFineGrid) {
  const Matrix x0 = Vector::LinSpaced(1000, 0.0, 1.0);
  const PredictionResult p = predict(step_model(), x0);
  ASSERT_TRUE(p.mean.allFinite());
  ASSERT_TRUE(p.variance.allFinite());
  double max_jump = 0.0;
  for (Eigen::Index i = 1; i < x0.rows(); ++i) {
    max_jump = std::max(max_jump, std::abs(p.mean(i, 0) - p.mean(i - 1, 0)));
  }
  // A grid step of 1e-3 on an output range of 2.
  EXPECT_LT(max_jump, 0.2);
  EXPECT_GE(p.variance.minCoeff(), 0.0);
}

TEST(Predict, InterpolatesTrainingPoints) {
  const TrainingData data = step_data();
  const PredictionResult p = predict(step_model(), data.x);
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    EXPECT_NEAR(p.mean(i, 0), data.y(i, 0), 0.05);
    EXPECT_LT(std::sqrt(p.variance(i, 0)), 0.02);
  }
}

TEST(Predict, RejectsWrongInputWidth) {
  EXPECT_THROW(predict(step_model(), Matrix::Zero(3, 2)), ContractViolation);
}

TEST(ModelIo, RoundTripIsExact) {
  const TrainedEmulator& m = step_model();
  const auto path = temp_path("roundtrip.json");
  save(m, path);
  const TrainedEmulator back = load(path);
  EXPECT_TRUE(back == m);
  const Matrix x0 = bench::step_test_inputs();
  const PredictionResult a = predict(m, x0);
  const PredictionResult b = predict(back, x0);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(to_json(back), to_json(m));
  std::filesystem::remove(path);
}

TEST(ModelIo, TruncatedFileIsMalformed) {
  const std::string text = to_json(step_model());
  EXPECT_THROW(from_json(text.substr(0, text.size() / 2)), MalformedModelFile);
  EXPECT_THROW(from_json("{}"), MalformedModelFile);
}

TEST(ModelIo, VersionMismatchIsReported) {
  std::string text = to_json(step_model());
  const std::string key = "\"format_version\": 1";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"format_version\": 99");
  EXPECT_THROW(from_json(text), VersionMismatch);
}

TEST(ModelIo, EditedDataFailsDigest) {
  TrainedEmulator m = step_model();
  const std::string digest = m.data_digest;
  m.data.y(0, 0) += 1.0;
  std::string text = to_json(m);
  EXPECT_NE(text.find(digest), std::string::npos);
  EXPECT_THROW(from_json(text), DigestMismatch);
}

TEST(ModelIo, MissingFileIsAnError) {
  EXPECT_THROW(load(temp_path("does_not_exist.json")), Error);
}

TEST(ModelIo, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(ModelIo, ArchitectureJson) {
  const Architecture a = architecture_from_json(R"({"layers": [2, 1], "input_dims": 3,
      "input_connected": true})");
  EXPECT_EQ(a.nodes_per_layer, (std::vector<int>{2, 1}));
  EXPECT_EQ(a.input_dims, 3);
  EXPECT_TRUE(a.input_connected);
  EXPECT_TRUE(architecture_from_json(architecture_to_json(a)) == a);
  EXPECT_THROW(architecture_from_json("[1, 2]"), ContractViolation);
}

TEST(ModelIo, ConfigJsonRoundTrip) {
  EmulatorConfig c = small_config(9);
  c.training.refit.estimate_nugget = true;
  c.mode = ImputationMode::IndependentChains;
  EXPECT_TRUE(config_from_json(config_to_json(c)) == c);
}
