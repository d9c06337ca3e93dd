#include "sidgp/bench/dataset.hpp"

#include "sidgp/error.hpp"
#include "sidgp/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

namespace sidgp::bench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

void Dataset::validate() const {
  if (inputs.rows() != outputs.rows()) {
    throw RowCountMismatch("dataset has " + std::to_string(inputs.rows()) +
                           " input rows but " + std::to_string(outputs.rows()) +
                           " output rows");
  }
  if (!inputs.allFinite() || !outputs.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  const std::string name = path.string();

  std::vector<double> values;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    Eigen::Index fields = 0;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(name, line_no,
                         "field " + std::to_string(fields + 1) + " ('" + std::string(field) +
                             "') is not a number");
      }
      if (!std::isfinite(v)) {
        throw ParseError(name, line_no,
                         "field " + std::to_string(fields + 1) + " is not finite");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cols < 0) {
      cols = fields;
    } else if (fields != cols) {
      throw ParseError(name, line_no,
                       "ragged row: " + std::to_string(fields) + " fields, expected " +
                           std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("'" + name + "' contains no data rows");

  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    }
  }
  return out;
}

Dataset ingest_csv(const std::filesystem::path& path_x, const std::filesystem::path& path_y) {
  Dataset ds;
  ds.inputs = read_csv_matrix(path_x);
  ds.outputs = read_csv_matrix(path_y);
  if (ds.inputs.rows() != ds.outputs.rows()) {
    throw RowCountMismatch("'" + path_x.string() + "' has " +
                           std::to_string(ds.inputs.rows()) + " rows but '" +
                           path_y.string() + "' has " + std::to_string(ds.outputs.rows()));
  }
  for (Eigen::Index d = 0; d < ds.inputs.cols(); ++d) {
    ds.input_names.push_back("x" + std::to_string(d));
  }
  for (Eigen::Index p = 0; p < ds.outputs.cols(); ++p) {
    ds.output_names.push_back("y" + std::to_string(p));
  }
  return ds;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out << ',';
      out << header[j];
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace sidgp::bench
