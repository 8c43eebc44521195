#pragma once

#include <string>
#include <vector>

#include "phia/scenario.hpp"

namespace phia {

struct LoadedScenario {
  Scenario scenario;
  RegisteredSystem system;
};

/// Reads a YAML scenario. `overrides` are "dotted.key=value" strings applied
/// to the document before interpretation; the value is itself parsed as YAML
/// so lists work ("initial_state.q=[0.1, 1]"). "disturbance=none" replaces the
/// schedule with d = 0.
///
/// Throws Error with code "config-parse" for syntax errors and malformed
/// overrides, "config-invalid" (detail starts with the field path) for
/// anything that parses but does not describe a valid scenario.
LoadedScenario load_scenario_file(const std::string& path,
                                  const std::vector<std::string>& overrides = {});
LoadedScenario load_scenario_text(const std::string& text,
                                  const std::vector<std::string>& overrides = {});

// Deterministic multi-line description of a validated scenario.
std::string scenario_report(const LoadedScenario& loaded);

}  // namespace phia
