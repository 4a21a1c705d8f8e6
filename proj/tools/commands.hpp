#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace cli {

inline constexpr const char* kVersion = "1.0.0";

/// Command names in pipeline order.
const std::vector<std::string>& command_names();

/// Runs one command into config.output_dir. Throws ConfigError, MissingDependency or ltr::Error.
void run_command(const std::string& name, const ProjectConfig& config);

}  // namespace cli
