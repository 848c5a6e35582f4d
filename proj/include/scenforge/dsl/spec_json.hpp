#pragma once

#include "json.hpp"
#include "scenforge/dsl/spec.hpp"

namespace scenforge::dsl {

// JSON mirror of the domain model used by intermediate artifacts. Optional
// fields are omitted when absent; enums are written as their tokens.

nlohmann::json to_json(const ScenarioSpec& spec);
nlohmann::json to_json(const OracleEntry& entry);

/// Throws std::invalid_argument (with the offending key) on malformed input.
ScenarioSpec spec_from_json(const nlohmann::json& j);
OracleEntry oracle_entry_from_json(const nlohmann::json& j);

}  // namespace scenforge::dsl
