#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "heatsheet/hitting.hpp"
#include "heatsheet/invariant.hpp"

namespace heatsheet {

// Subcommand-specific knobs carried alongside the core ExperimentConfig.
struct HitOptions {
  std::string mode = "window"; // "window" | "restart"
};

struct CapacityOptions {
  double beta = -5.0;
  int m = 500;
};

struct InvariantOptions {
  BridgeMode mode = BridgeMode::Standard;
  int n_samples = 10000;
  double ball_radius = 1.0;
  double t1 = 5.0;
  double t2 = 10.0;
  bool run_ergodic = false;
  int ergodic_n = 2000;
};

struct OutputOptions {
  std::string dir = "out";
  bool write_csv = true;
  bool dump_paths = false;
};

struct RunConfig {
  std::string subcommand;
  ExperimentConfig experiment;
  nlohmann::json potential_json; // verbatim potential spec for the echo
  bool has_target = false;
  TargetSet target = TargetSet::ball({0.0}, 1.0);
  HitOptions hit;
  CapacityOptions capacity;
  InvariantOptions invariant;
  OutputOptions output;
};

// Reads a JSON config file. Throws ConfigError with the offending path.
nlohmann::json load_config_file(const std::string& path);

// Applies "dotted.path=value" overrides; values parse as JSON when possible,
// else as strings.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

// Parses and validates; every violation names the config field.
RunConfig parse_run_config(const std::string& subcommand, const nlohmann::json& config);

// Canonical JSON echo of a parsed config (re-parsing it reproduces the run).
nlohmann::json config_echo(const RunConfig& cfg);

TargetSet target_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json target_to_json(const TargetSet& t);
Potential potential_from_json(const nlohmann::json& j, const std::string& path);

} // namespace heatsheet
