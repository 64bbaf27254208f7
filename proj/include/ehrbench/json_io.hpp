#pragma once

#include <json.hpp>

#include "ehrbench/answer.hpp"

namespace ehrbench {

/// {"kind": "ids"|"number"|"binary"|"bits"|"word"|"invalid", ...}. Numbers keep their scale.
nlohmann::json parsed_to_json(const ParsedAnswer& answer);
/// Throws std::invalid_argument.
ParsedAnswer parsed_from_json(const nlohmann::json& j);

}  // namespace ehrbench
