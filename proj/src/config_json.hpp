#pragma once

// Internal JSON helpers shared between the model, trainer and service
// translation units.

#include <json.hpp>

#include "listrank/model.hpp"

namespace listrank::detail {

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

} // namespace listrank::detail
