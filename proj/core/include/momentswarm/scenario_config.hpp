#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "momentswarm/swarmsim.hpp"

namespace momentswarm {

/// A scenario read from JSON plus its descriptive name.
struct ScenarioConfig {
  std::string name;
  Scenario scenario;
};

/// Parses a scenario document. Relative file paths (target image or moment
/// CSV) resolve against `base_dir`. Unknown keys and out-of-range values
/// raise ConfigError naming the offending field.
ScenarioConfig parse_scenario_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {});

ScenarioConfig load_scenario_config(const std::filesystem::path& path);

}  // namespace momentswarm
