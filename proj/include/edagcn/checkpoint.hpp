#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "edagcn/model.hpp"

namespace edagcn {

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelConfig config;
  ParameterSet params;
  std::string config_hash;
};

/// JSON document: {"config", "config_hash", "tensors": [{"name","shape","data"}]}.
/// Doubles are written with round-trip precision.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Loads and checks every tensor against the shapes implied by the stored
/// config; throws ShapeError on any mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Same, additionally requiring the stored config to match `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace edagcn
