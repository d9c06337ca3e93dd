#include "sidgp/bench/dataset.hpp"
#include "sidgp/bench/experiment.hpp"
#include "sidgp/bench/problems.hpp"
#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace sidgp;
using namespace sidgp::bench;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("sidgp_bench_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(Nrmsep, HandComputedCases) {
  const Eigen::Vector3d truth(0.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(nrmsep(truth, truth), 0.0);
  // Errors (1, 1, 1): RMSE 1 over range 2.
  EXPECT_DOUBLE_EQ(nrmsep(truth, Eigen::Vector3d(1.0, 2.0, 3.0)), 0.5);
  // Errors (0, 0, 3): RMSE sqrt(3) over range 2.
  EXPECT_DOUBLE_EQ(nrmsep(truth, Eigen::Vector3d(0.0, 1.0, 5.0)), std::sqrt(3.0) / 2.0);
}

TEST(Nrmsep, MatchesDirectRecomputation) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector t(5), m(5);
    for (int i = 0; i < 5; ++i) {
      t(i) = n(rng);
      m(i) = n(rng);
    }
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += (t(i) - m(i)) * (t(i) - m(i));
    const double expected = std::sqrt(s / 5.0) / (t.maxCoeff() - t.minCoeff());
    EXPECT_NEAR(nrmsep(t, m), expected, 1e-14 * expected);
  }
}

TEST(Nrmsep, RejectsDegenerateInput) {
  EXPECT_THROW(nrmsep(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.0, 0.0)), ContractViolation);
  EXPECT_THROW(nrmsep(Vector::Ones(1), Vector::Ones(1)), ContractViolation);
  EXPECT_THROW(nrmsep(Eigen::Vector2d(0.0, 1.0), Vector::Ones(3)), ContractViolation);
}

TEST(StepFunction, ValuesAndBoundaries) {
  EXPECT_EQ(step_function(0.0), -1.0);
  EXPECT_EQ(step_function(0.25), -1.0);
  EXPECT_EQ(step_function(std::nextafter(0.5, 0.0)), -1.0);
  EXPECT_EQ(step_function(0.5), 1.0);
  EXPECT_EQ(step_function(0.75), 1.0);
  EXPECT_THROW(step_function(1.0), ContractViolation);
  EXPECT_THROW(step_function(-0.1), ContractViolation);
  EXPECT_THROW(step_function(std::nan("")), ContractViolation);
}

TEST(StepDesigns, TrainingAndTestGrids) {
  const Vector x = step_training_inputs();
  ASSERT_EQ(x.size(), 10);
  EXPECT_EQ(x(0), 0.0);
  EXPECT_LT(x(9), 1.0);
  EXPECT_NEAR(x(9), 1.0, 1e-15);
  for (int i = 1; i < 10; ++i) EXPECT_GT(x(i), x(i - 1));
  const Vector t = step_test_inputs();
  ASSERT_EQ(t.size(), 200);
  EXPECT_EQ(t(0), 0.0);
  EXPECT_EQ(t(100), 0.5);
  EXPECT_EQ(t(199), 199.0 / 200.0);
}

TEST(Function5d, Values) {
  Vector x(5);
  x << 0.1, 0.9, 0.9, 0.9, 0.9;
  EXPECT_EQ(function_5d(x), 0.0);
  x.setOnes();
  EXPECT_NEAR(function_5d(x), 4.32154, 1e-5);
  EXPECT_NEAR(function_5d(x), std::exp(1.0 + 1.0 / 4 + 1.0 / 9 + 1.0 / 16 + 1.0 / 25), 1e-14);
  x.setConstant(0.2);
  EXPECT_EQ(function_5d(x), 0.0);
  x.setConstant(0.2 + 1e-9);
  EXPECT_GT(function_5d(x), 0.0);
  x(3) = 1.5;
  EXPECT_THROW(function_5d(x), ContractViolation);
  EXPECT_THROW(function_5d(Vector::Ones(4)), ContractViolation);
}

TEST(LatinHypercube, OnePointPerBin) {
  const Matrix d = lhs_sample(100, 5, 7);
  ASSERT_EQ(d.rows(), 100);
  ASSERT_EQ(d.cols(), 5);
  for (Eigen::Index c = 0; c < 5; ++c) {
    std::set<int> bins;
    for (Eigen::Index i = 0; i < 100; ++i) {
      ASSERT_GE(d(i, c), 0.0);
      ASSERT_LT(d(i, c), 1.0);
      bins.insert(static_cast<int>(std::floor(d(i, c) * 100.0)));
    }
    EXPECT_EQ(bins.size(), 100u) << "column " << c;
  }
}

TEST(LatinHypercube, BoundsSinglePointAndSeeds) {
  const Matrix d = lhs_sample(20, 2, {{-1.0, 1.0}, {10.0, 30.0}}, 3);
  for (Eigen::Index i = 0; i < 20; ++i) {
    EXPECT_GE(d(i, 0), -1.0);
    EXPECT_LE(d(i, 0), 1.0);
    EXPECT_GE(d(i, 1), 10.0);
    EXPECT_LE(d(i, 1), 30.0);
  }
  const Matrix one = lhs_sample(1, 3, 5);
  EXPECT_EQ(one.rows(), 1);
  EXPECT_EQ(lhs_sample(30, 4, 11), lhs_sample(30, 4, 11));
  EXPECT_NE(lhs_sample(30, 4, 11), lhs_sample(30, 4, 12));
  EXPECT_THROW(lhs_sample(0, 2, 1), ContractViolation);
}

TEST(CsvIngest, ReadsMatchingFiles) {
  const auto x = write_temp("x.csv", "0.1, 2\n3e-1,4\n");
  const auto y = write_temp("y.csv", "5\n-6.5\n");
  const Dataset d = ingest_csv(x, y);
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.inputs(1, 0), 0.3);
  EXPECT_EQ(d.inputs(0, 1), 2.0);
  EXPECT_EQ(d.outputs(1, 0), -6.5);
  EXPECT_EQ(d.input_names, (std::vector<std::string>{"x0", "x1"}));
}

TEST(CsvIngest, RaggedRowNamesTheLine) {
  const auto p = write_temp("ragged.csv", "1,2\n3,4\n5\n");
  try {
    read_csv_matrix(p);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CsvIngest, RejectsNonNumericAndNonFinite) {
  try {
    read_csv_matrix(write_temp("text.csv", "1,2\nabc,4\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(read_csv_matrix(write_temp("nan.csv", "1,nan\n")), ParseError);
  EXPECT_THROW(read_csv_matrix(write_temp("inf.csv", "inf,1\n")), ParseError);
  EXPECT_THROW(read_csv_matrix(write_temp("empty.csv", "")), DataError);
  EXPECT_THROW(read_csv_matrix("/nonexistent/sidgp.csv"), DataError);
}

TEST(CsvIngest, RowCountMismatch) {
  const auto x = write_temp("x3.csv", "1\n2\n3\n");
  const auto y = write_temp("y2.csv", "1\n2\n");
  EXPECT_THROW(ingest_csv(x, y), RowCountMismatch);
}

TEST(CsvIngest, WriteReadRoundTrip) {
  Matrix m(2, 2);
  m << 0.1, 1e-300, -3.25, 7.0 / 3.0;
  const auto p = std::filesystem::temp_directory_path() / "sidgp_bench_roundtrip.csv";
  write_csv_matrix(p, m);
  EXPECT_EQ(read_csv_matrix(p), m);
}

namespace {

ExperimentConfig tiny_step() {
  ExperimentConfig c;
  c.name = "step";
  c.record_timings = false;
  c.test_size = 40;
  c.emulator.training.iterations = 12;
  c.emulator.training.burn_in = 6;
  c.emulator.training.ess_sweeps = 3;
  c.emulator.imputations = 4;
  c.emulator.thinning = 2;
  return c;
}

}  // namespace

TEST(Experiment, StepReportShapes) {
  const ExperimentReport r = run_experiment(tiny_step());
  EXPECT_EQ(r.train_x.rows(), 10);
  EXPECT_EQ(r.test_x.rows(), 40);
  EXPECT_EQ(r.dgp.architecture.nodes_per_layer, (std::vector<int>{1, 1, 1}));
  ASSERT_TRUE(r.control.has_value());
  EXPECT_EQ(r.control->architecture.layers(), 1);
  const Matrix plot = plot_data(r, r.dgp, 0);
  ASSERT_EQ(plot.rows(), 40);
  ASSERT_EQ(plot.cols(), 4);
  EXPECT_GE(plot.col(3).minCoeff(), 0.0);
  EXPECT_EQ(plot_header(r), (std::vector<std::string>{"x0", "truth", "mean", "sd"}));
  EXPECT_NEAR(r.dgp.nrmsep[0], nrmsep(r.truth.col(0), r.dgp.prediction.mean.col(0)), 0.0);
}

TEST(Experiment, EchoedConfigReproducesReport) {
  const ExperimentReport r = run_experiment(tiny_step());
  const std::string json = report_to_json(r);
  const ExperimentConfig echoed = experiment_config_from_json(json);
  EXPECT_EQ(report_to_json(run_experiment(echoed)), json);
}

TEST(Experiment, CsvNeedsAllPaths) {
  ExperimentConfig c = tiny_step();
  c.name = "csv";
  EXPECT_THROW(run_experiment(c), ContractViolation);
  c.name = "unknown";
  EXPECT_THROW(run_experiment(c), ContractViolation);
}

TEST(Experiment, CsvExperimentRuns) {
  std::string x, y, tx, ty;
  for (int i = 0; i < 8; ++i) {
    const double a = i / 7.0;
    x += format_double(a) + "," + format_double(1.0 - a * a) + "\n";
    y += format_double(std::sin(3.0 * a)) + "\n";
    tx += format_double(a + 0.05) + ",0.5\n";
    ty += format_double(std::sin(3.0 * (a + 0.05))) + "\n";
  }
  ExperimentConfig c = tiny_step();
  c.name = "csv";
  c.x = write_temp("cx.csv", x);
  c.y = write_temp("cy.csv", y);
  c.test_x = write_temp("ctx.csv", tx);
  c.test_y = write_temp("cty.csv", ty);
  c.out_dir = std::filesystem::temp_directory_path() / "sidgp_bench_csv_out";
  const ExperimentReport r = run_experiment(c);
  EXPECT_EQ(r.dgp.architecture.nodes_per_layer, (std::vector<int>{2, 2, 1}));
  write_report(r);
  EXPECT_TRUE(std::filesystem::exists(c.out_dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(c.out_dir / "plot_dgp.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.out_dir / "plot_gp.csv"));
}

TEST(Experiment, DesignSeedFixesTheSynth5dDesign) {
  ExperimentConfig c = tiny_step();
  c.name = "synth5d";
  c.train_size = 12;
  c.test_size = 10;
  c.run_control = false;
  c.design_seed = 4;
  c.emulator.training.seed = 1;
  const ExperimentReport a = run_experiment(c);
  c.emulator.training.seed = 2;
  const ExperimentReport b = run_experiment(c);
  EXPECT_EQ(a.train_x, b.train_x);
  EXPECT_EQ(a.test_x, b.test_x);
  EXPECT_EQ(a.train_x, lhs_sample(12, 5, 4));
  EXPECT_EQ(*experiment_config_from_json(report_to_json(a)).design_seed, 4u);
  c.design_seed.reset();
  EXPECT_EQ(run_experiment(c).train_x, lhs_sample(12, 5, 2));
}
