#include "sidgp/architecture.hpp"

#include "sidgp/error.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace sidgp {

void TrainingData::validate() const {
  if (x.rows() != y.rows()) {
    throw RowCountMismatch("training inputs have " + std::to_string(x.rows()) +
                           " rows but outputs have " + std::to_string(y.rows()));
  }
  if (x.rows() < 1 || x.cols() < 1 || y.cols() < 1) {
    throw DataError("training data is empty");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw DataError("training data contains NaN or infinite values");
  }
}

Eigen::Index Architecture::node_input_dims(int layer) const {
  if (layer == 0) return input_dims;
  return nodes(layer - 1) + (input_connected ? input_dims : 0);
}

int Architecture::total_nodes() const {
  return std::accumulate(nodes_per_layer.begin(), nodes_per_layer.end(), 0);
}

void Architecture::validate() const {
  if (nodes_per_layer.empty()) {
    throw ContractViolation("architecture needs at least one layer");
  }
  for (int p : nodes_per_layer) {
    if (p < 1) throw ContractViolation("every layer needs at least one node");
  }
  if (input_dims < 1) {
    throw ContractViolation("architecture needs at least one input dimension");
  }
}

void Architecture::validate(const TrainingData& data) const {
  validate();
  data.validate();
  if (data.x.cols() != input_dims) {
    throw ContractViolation("architecture expects " + std::to_string(input_dims) +
                            " input columns, data has " +
                            std::to_string(data.x.cols()));
  }
  if (data.y.cols() != output_dims()) {
    throw ContractViolation("architecture has " + std::to_string(output_dims()) +
                            " final-layer nodes, data has " +
                            std::to_string(data.y.cols()) + " output columns");
  }
}

std::string Architecture::describe() const {
  std::ostringstream os;
  os << layers() << (layers() == 1 ? " layer [" : " layers [");
  for (std::size_t l = 0; l < nodes_per_layer.size(); ++l) {
    if (l) os << '-';
    os << nodes_per_layer[l];
  }
  os << ']';
  if (input_connected) os << " +IC";
  if (shared_range) os << " shared-range";
  return os.str();
}

void validate_state(const Architecture& arch, const TrainingData& data,
                    const LatentState& state) {
  if (static_cast<int>(state.hidden.size()) != arch.hidden_layers()) {
    throw ContractViolation("latent state has " + std::to_string(state.hidden.size()) +
                            " hidden layers, architecture has " +
                            std::to_string(arch.hidden_layers()));
  }
  for (int l = 0; l < arch.hidden_layers(); ++l) {
    const Matrix& h = state.hidden[l];
    if (h.rows() != data.size() || h.cols() != arch.nodes(l)) {
      throw ContractViolation("latent layer " + std::to_string(l + 1) +
                              " has the wrong shape");
    }
    if (!h.allFinite()) {
      throw NumericFailure("latent layer " + std::to_string(l + 1) +
                           " contains non-finite values");
    }
  }
}

Matrix layer_inputs(const Architecture& arch, const TrainingData& data,
                    const LatentState& state, int layer) {
  if (layer == 0) return data.x;
  const Matrix& prev = state.hidden.at(layer - 1);
  if (!arch.input_connected) return prev;
  Matrix in(prev.rows(), prev.cols() + data.x.cols());
  in << prev, data.x;
  return in;
}

const Matrix& layer_outputs(const TrainingData& data, const LatentState& state,
                            int layer) {
  if (layer < static_cast<int>(state.hidden.size())) return state.hidden[layer];
  return data.y;
}

std::string node_name(int layer, int node) {
  return "layer " + std::to_string(layer + 1) + " node " + std::to_string(node + 1);
}

}  // namespace sidgp
