#include "sidgp/model_io.hpp"

#include "sidgp/emulator.hpp"
#include "sidgp/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sidgp {

using json = nlohmann::json;

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw NumericFailure("format_double: conversion failed");
  return std::string(buf.data(), end);
}

std::string canonical_csv(const TrainingData& data) {
  std::string out;
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index d = 0; d < data.x.cols(); ++d) {
      if (d) out += ',';
      out += format_double(data.x(i, d));
    }
    for (Eigen::Index p = 0; p < data.y.cols(); ++p) {
      out += ',';
      out += format_double(data.y(i, p));
    }
    out += '\n';
  }
  return out;
}

std::string data_digest(const TrainingData& data) {
  const std::string bytes = canonical_csv(data);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index expected_cols = -1) {
  if (!j.is_array()) throw MalformedModelFile("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = expected_cols;
  if (rows > 0) {
    if (!j[0].is_array()) throw MalformedModelFile("matrix row is not an array");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  if (cols < 0) cols = 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw MalformedModelFile("ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw MalformedModelFile("non-numeric matrix entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw MalformedModelFile("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw MalformedModelFile("non-numeric array entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json kernel_to_json(const KernelSpec& k) {
  return json{{"family", std::string(to_string(k.family))},
              {"variance", k.variance},
              {"nugget", k.nugget},
              {"ranges", vector_to_json(k.ranges)}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  k.family = kernel_family_from_string(j.at("family").get<std::string>());
  k.variance = j.at("variance").get<double>();
  k.nugget = j.at("nugget").get<double>();
  k.ranges = vector_from_json(j.at("ranges"));
  return k;
}

json fit_options_to_json(const FitOptions& f) {
  return json{{"starts", f.starts},
              {"estimate_variance", f.estimate_variance},
              {"max_iterations", f.max_iterations},
              {"gradient_tolerance", f.gradient_tolerance},
              {"start_jitter", f.start_jitter},
              {"seed", f.seed},
              {"estimate_nugget", f.estimate_nugget},
              {"nugget_lower", f.nugget_lower},
              {"nugget_upper", f.nugget_upper},
              {"range_lower", f.range_lower},
              {"range_upper", f.range_upper},
              {"variance_lower", f.variance_lower}};
}

FitOptions fit_options_from_json(const json& j) {
  FitOptions f;
  f.starts = j.at("starts").get<int>();
  f.max_iterations = j.at("max_iterations").get<int>();
  f.gradient_tolerance = j.at("gradient_tolerance").get<double>();
  f.start_jitter = j.at("start_jitter").get<double>();
  f.seed = j.at("seed").get<std::uint64_t>();
  f.estimate_variance = j.at("estimate_variance").get<bool>();
  f.estimate_nugget = j.at("estimate_nugget").get<bool>();
  f.nugget_lower = j.at("nugget_lower").get<double>();
  f.nugget_upper = j.at("nugget_upper").get<double>();
  f.range_lower = j.at("range_lower").get<double>();
  f.range_upper = j.at("range_upper").get<double>();
  f.variance_lower = j.at("variance_lower").get<double>();
  return f;
}

json config_json(const EmulatorConfig& c) {
  const TrainingConfig& t = c.training;
  return json{{"training",
               {{"iterations", t.iterations},
                {"burn_in", t.burn_in},
                {"ess_sweeps", t.ess_sweeps},
                {"seed", t.seed},
                {"nugget", t.nugget},
                {"max_consecutive_failures", t.max_consecutive_failures},
                {"estimate_hidden_variance", t.estimate_hidden_variance},
                {"initial_jitter", t.initial_jitter},
                {"initial_fit", fit_options_to_json(t.initial_fit)},
                {"refit", fit_options_to_json(t.refit)}}},
              {"imputations", c.imputations},
              {"imputation_mode", std::string(to_string(c.mode))},
              {"thinning", c.thinning}};
}

EmulatorConfig config_parse(const json& j) {
  EmulatorConfig c;
  const json& t = j.at("training");
  c.training.iterations = t.at("iterations").get<int>();
  c.training.burn_in = t.at("burn_in").get<int>();
  c.training.ess_sweeps = t.at("ess_sweeps").get<int>();
  c.training.seed = t.at("seed").get<std::uint64_t>();
  c.training.nugget = t.at("nugget").get<double>();
  c.training.max_consecutive_failures = t.at("max_consecutive_failures").get<int>();
  c.training.estimate_hidden_variance = t.at("estimate_hidden_variance").get<bool>();
  c.training.initial_jitter = t.at("initial_jitter").get<double>();
  c.training.initial_fit = fit_options_from_json(t.at("initial_fit"));
  c.training.refit = fit_options_from_json(t.at("refit"));
  c.imputations = j.at("imputations").get<int>();
  c.mode = imputation_mode_from_string(j.at("imputation_mode").get<std::string>());
  c.thinning = j.at("thinning").get<int>();
  return c;
}

json arch_json(const Architecture& a) {
  return json{{"nodes_per_layer", a.nodes_per_layer},
              {"input_dims", a.input_dims},
              {"input_connected", a.input_connected},
              {"shared_range", a.shared_range},
              {"kernel", std::string(to_string(a.family))}};
}

Architecture arch_parse(const json& j) {
  Architecture a;
  if (j.contains("nodes_per_layer")) {
    a.nodes_per_layer = j.at("nodes_per_layer").get<std::vector<int>>();
  } else {
    a.nodes_per_layer = j.at("layers").get<std::vector<int>>();
  }
  a.input_dims = j.value("input_dims", static_cast<Eigen::Index>(1));
  a.input_connected = j.value("input_connected", false);
  a.shared_range = j.value("shared_range", false);
  a.family = kernel_family_from_string(j.value("kernel", std::string("squared_exponential")));
  return a;
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw MalformedModelFile(std::string("malformed model file: ") + e.what());
  } catch (const ContractViolation& e) {
    throw MalformedModelFile(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace

std::string to_json(const TrainedEmulator& model) {
  json theta = json::array();
  for (const auto& layer : model.params) {
    json nodes = json::array();
    for (const auto& k : layer) nodes.push_back(kernel_to_json(k));
    theta.push_back(std::move(nodes));
  }
  json imputations = json::array();
  for (const auto& state : model.imputations) {
    json layers = json::array();
    for (const auto& h : state.hidden) layers.push_back(matrix_to_json(h));
    imputations.push_back(std::move(layers));
  }
  json doc{{"format", "sidgp-model"},
           {"format_version", kModelFormatVersion},
           {"architecture", arch_json(model.architecture)},
           {"theta", std::move(theta)},
           {"imputations", std::move(imputations)},
           {"seed", model.seed},
           {"data_digest", model.data_digest},
           {"data", {{"x", matrix_to_json(model.data.x)}, {"y", matrix_to_json(model.data.y)}}},
           {"config", config_json(model.config)}};
  return doc.dump(1) + "\n";
}

TrainedEmulator from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedModelFile(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) {
    throw MalformedModelFile("model file has no format_version");
  }
  const int version = guarded([&] { return doc.at("format_version").get<int>(); });
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  }

  TrainedEmulator model = guarded([&] {
    TrainedEmulator m;
    m.architecture = arch_parse(doc.at("architecture"));
    m.architecture.validate();
    m.data.x = matrix_from_json(doc.at("data").at("x"));
    m.data.y = matrix_from_json(doc.at("data").at("y"));
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.data_digest = doc.at("data_digest").get<std::string>();
    m.config = config_parse(doc.at("config"));
    for (const auto& layer : doc.at("theta")) {
      std::vector<KernelSpec> nodes;
      for (const auto& k : layer) nodes.push_back(kernel_from_json(k));
      m.params.push_back(std::move(nodes));
    }
    for (const auto& state : doc.at("imputations")) {
      LatentState s;
      for (const auto& h : state) s.hidden.push_back(matrix_from_json(h));
      m.imputations.push_back(std::move(s));
    }
    return m;
  });

  if (data_digest(model.data) != model.data_digest) {
    throw DigestMismatch("training data digest does not match the stored digest");
  }
  guarded([&] {
    model.architecture.validate(model.data);
    if (static_cast<int>(model.params.size()) != model.architecture.layers()) {
      throw MalformedModelFile("theta does not match the architecture");
    }
    for (int l = 0; l < model.architecture.layers(); ++l) {
      if (static_cast<int>(model.params[l].size()) != model.architecture.nodes(l)) {
        throw MalformedModelFile("theta does not match the architecture");
      }
    }
    if (model.imputations.empty()) throw MalformedModelFile("model has no imputations");
    return 0;
  });
  try {
    model.rebuild();
  } catch (const ContractViolation& e) {
    throw MalformedModelFile(std::string("inconsistent model file: ") + e.what());
  } catch (const NumericFailure& e) {
    throw MalformedModelFile(std::string("inconsistent model file: ") + e.what());
  }
  return model;
}

void save(const TrainedEmulator& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << to_json(model);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

TrainedEmulator load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string config_to_json(const EmulatorConfig& config) {
  return config_json(config).dump();
}

EmulatorConfig config_from_json(const std::string& text) {
  return guarded([&] { return config_parse(json::parse(text)); });
}

std::string architecture_to_json(const Architecture& arch) {
  return arch_json(arch).dump();
}

Architecture architecture_from_json(const std::string& text) {
  try {
    return arch_parse(json::parse(text));
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("invalid architecture JSON: ") + e.what());
  }
}

}  // namespace sidgp
