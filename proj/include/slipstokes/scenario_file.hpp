#pragma once

#include <filesystem>
#include <string>

#include "slipstokes/scenario.hpp"

namespace slipstokes {

/// INI-style scenario documents. Sections: [domain] [physics] [wall]
/// [friction.tresca] or [friction.coulomb] [discretization] [verify].
/// Unknown sections or keys are rejected. Errors are ParseError with the
/// key path (e.g. "physics.zeta") and the violated condition.
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario(const std::filesystem::path& path);

/// Canonical document; parse_scenario_text(serialize_scenario(s)) gives s back.
/// Throws UsageError for a custom (non-builtin) function or a force callback.
std::string serialize_scenario(const Scenario& s);

/// SHA-256 of the canonical document.
std::string scenario_hash(const Scenario& s);

}  // namespace slipstokes
