#pragma once

#include <string>

#include <json.hpp>

#include "dwlkit/model.hpp"

namespace dwlkit {

nlohmann::json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

// Flat little-endian doubles in block order at `path`, plus a manifest at
// `path + ".json"` listing the configuration and each block's name, shape
// and offset.
void save_params(const std::string& path, const ModelParams& params);
ModelParams load_params(const std::string& path);

}  // namespace dwlkit
