#pragma once

#include <map>
#include <string>
#include <vector>

#include "phia/momentum_transform.hpp"

namespace phia {

using ParamMap = std::map<std::string, double>;

struct RegisteredSystem {
  TransformedSystem transform;
  BoxDomain guard;        // hard limits checked on every accepted step
  std::string variant;    // shaped-potential variant, empty when not applicable
};

// Known ids: "cart-pendulum", "linear-2dof". Missing parameters take their
// defaults; unknown keys throw "invalid-argument", unknown ids
// "unknown-system".
RegisteredSystem build_system(const std::string& id, const ParamMap& params);

std::vector<std::string> known_systems();
// Parameter names with their default values.
ParamMap default_parameters(const std::string& id);

}  // namespace phia
