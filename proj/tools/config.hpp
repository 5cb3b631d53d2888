#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace bchain::cli {

// Schema violation; message carries the field path and, where found, the line.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json body;      // validated, defaults filled in
  std::string source_sha256;
};

const std::vector<std::string>& experiment_names();

// Every problem found, one line each; empty when the document is valid.
std::vector<std::string> validate_text(const std::string& text);

// Parses and validates; throws ConfigError with all diagnostics joined.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace bchain::cli
