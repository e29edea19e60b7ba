#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "safeimm/runner.hpp"

namespace safeimm {

/// Malformed or inconsistent configuration; `what()` names the field and,
/// when known, the line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a YAML run configuration. `overrides` are "dotted.key=value"
/// strings applied before parsing. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Same as load_config, from an in-memory document.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

/// Every key the parser accepts, as dotted paths.
const std::vector<std::string>& known_config_keys();

}  // namespace safeimm
