#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bchain/bose_hubbard.hpp"
#include "bchain/mps.hpp"
#include "config.hpp"

namespace bchain::cli {

struct RunOptions {
  std::string out_dir;
  int threads = 1;
  bool resume = false;
  long halt_after_step = -1;  // testing aid: stop at the first checkpoint at or past this sweep
};

// Raised after a deliberate halt; the checkpoint on disk is complete.
struct Interrupted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config sections to library objects. base_dir resolves relative CSV paths.
BhChainSpec chain_spec(const nlohmann::json& chain, const std::string& base_dir = ".");
BhChainSpec after_spec(const BhChainSpec& before, const nlohmann::json& chain, const nlohmann::json& after);
CanonicalMps initial_state(const nlohmann::json& chain, const nlohmann::json& initial);
std::vector<double> dtau_ladder(const nlohmann::json& ground);
std::vector<double> scan_grid(const nlohmann::json& scan);

// Writes every artifact plus manifest.json into opts.out_dir.
void run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, const std::string& base_dir = ".");

}  // namespace bchain::cli
