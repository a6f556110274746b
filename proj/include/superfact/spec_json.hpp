#pragma once

// SystemSpec <-> {"family", "omega", "gamma": {"m", "n"}, "alpha"?, "beta"?}.

#include <json.hpp>

#include "superfact/systems.hpp"

namespace superfact {

nlohmann::json to_json(const SystemSpec& spec);

/// Throws ConfigError on a missing or ill-typed field or an invalid system.
SystemSpec spec_from_json(const nlohmann::json& j);

}  // namespace superfact
