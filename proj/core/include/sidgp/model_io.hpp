#ifndef SIDGP_MODEL_IO_HPP
#define SIDGP_MODEL_IO_HPP

#include "sidgp/architecture.hpp"

#include <filesystem>
#include <string>

namespace sidgp {

struct TrainedEmulator;
struct EmulatorConfig;

inline constexpr int kModelFormatVersion = 1;

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Training data as headerless CSV: one line per row, inputs then outputs,
/// each value in shortest round-trip form, '\n' line endings.
std::string canonical_csv(const TrainingData& data);

/// Lower-case hex SHA-256 of canonical_csv(data).
std::string data_digest(const TrainingData& data);

/// Versioned JSON envelope. Latent imputations are stored as numbers; the
/// conditioned networks are rebuilt on load.
std::string to_json(const TrainedEmulator& model);

/// Throws VersionMismatch, DigestMismatch or MalformedModelFile.
TrainedEmulator from_json(const std::string& text);

void save(const TrainedEmulator& model, const std::filesystem::path& path);
TrainedEmulator load(const std::filesystem::path& path);

/// JSON rendering of a configuration, as echoed in reports and model files.
std::string config_to_json(const EmulatorConfig& config);
EmulatorConfig config_from_json(const std::string& text);

std::string architecture_to_json(const Architecture& arch);
/// Accepts {"layers": [...]} or {"nodes_per_layer": [...]} plus optional
/// "input_dims", "input_connected", "shared_range", "kernel".
Architecture architecture_from_json(const std::string& text);

}  // namespace sidgp

#endif  // SIDGP_MODEL_IO_HPP
