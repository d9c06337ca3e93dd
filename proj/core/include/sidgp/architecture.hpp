#ifndef SIDGP_ARCHITECTURE_HPP
#define SIDGP_ARCHITECTURE_HPP

#include "sidgp/kernel.hpp"

#include <string>
#include <vector>

namespace sidgp {

/// Global training data: inputs x (M x D) and outputs y (M x P_L).
struct TrainingData {
  Matrix x;
  Matrix y;

  Eigen::Index size() const { return x.rows(); }
  void validate() const;
  bool operator==(const TrainingData& o) const { return x == o.x && y == o.y; }
};

/// Feed-forward layered wiring of a deep GP.
///
/// Every node of layer l consumes all outputs of layer l-1 (layer 1 consumes
/// the global input). With `input_connected`, layers 2..L additionally
/// consume all global input dimensions, appended after the layer outputs.
struct Architecture {
  std::vector<int> nodes_per_layer;
  Eigen::Index input_dims = 1;
  bool input_connected = false;
  /// One range per node instead of one per input dimension.
  bool shared_range = false;
  KernelFamily family = KernelFamily::SquaredExponential;

  int layers() const { return static_cast<int>(nodes_per_layer.size()); }
  int hidden_layers() const { return layers() - 1; }
  int nodes(int layer) const { return nodes_per_layer.at(layer); }
  int output_dims() const { return nodes_per_layer.back(); }
  /// Input width of every node in `layer` (0-based).
  Eigen::Index node_input_dims(int layer) const;
  int total_nodes() const;

  void validate() const;
  /// Also checks the data matches the input and output widths.
  void validate(const TrainingData& data) const;

  /// e.g. "3x1 [1-1-1]" or "2 layers [5-1] +IC".
  std::string describe() const;

  bool operator==(const Architecture&) const = default;
};

/// One realization of every hidden-layer output. hidden[l] is M x P_{l+1}
/// for l = 0..L-2; column p is the output of node p of that layer.
struct LatentState {
  std::vector<Matrix> hidden;

  bool operator==(const LatentState& o) const {
    if (hidden.size() != o.hidden.size()) return false;
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      if (hidden[l].rows() != o.hidden[l].rows() ||
          hidden[l].cols() != o.hidden[l].cols() || hidden[l] != o.hidden[l]) {
        return false;
      }
    }
    return true;
  }
};

/// Kernel hyperparameters of every node, indexed [layer][node].
using NetworkParams = std::vector<std::vector<KernelSpec>>;

/// Checks shapes against the architecture and that all entries are finite.
void validate_state(const Architecture& arch, const TrainingData& data,
                    const LatentState& state);

/// Inputs of the nodes in `layer` (0-based) under `state`.
Matrix layer_inputs(const Architecture& arch, const TrainingData& data,
                    const LatentState& state, int layer);

/// Outputs of the nodes in `layer`: hidden values or, for the last layer,
/// the observed y.
const Matrix& layer_outputs(const TrainingData& data, const LatentState& state,
                            int layer);

/// "layer l node p" with 1-based indices.
std::string node_name(int layer, int node);

}  // namespace sidgp

#endif  // SIDGP_ARCHITECTURE_HPP
