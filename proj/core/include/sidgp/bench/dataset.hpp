#ifndef SIDGP_BENCH_DATASET_HPP
#define SIDGP_BENCH_DATASET_HPP

#include "sidgp/architecture.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sidgp::bench {

struct Dataset {
  Matrix inputs;
  Matrix outputs;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;

  Eigen::Index size() const { return inputs.rows(); }
  /// Equal row counts and finite entries.
  void validate() const;
  TrainingData training() const { return {inputs, outputs}; }
};

/// Headerless comma-separated doubles. Blank lines are skipped. Ragged rows,
/// non-numeric or non-finite fields raise ParseError with the 1-based line.
Matrix read_csv_matrix(const std::filesystem::path& path);

Dataset ingest_csv(const std::filesystem::path& path_x, const std::filesystem::path& path_y);

/// Writes values in shortest round-trip form, with an optional header line.
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});

}  // namespace sidgp::bench

#endif  // SIDGP_BENCH_DATASET_HPP
