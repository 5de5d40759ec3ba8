#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heatsheet/config.hpp"

namespace heatsheet {

// Exit-code categories surfaced by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPrecision = 3;
inline constexpr int kExitConvergence = 4;
inline constexpr int kExitRuntime = 5;

struct ExperimentOutput {
  nlohmann::json payload;
  // (relative file name, contents); written under output.dir by run().
  std::vector<std::pair<std::string, std::string>> csv_files;
  std::vector<std::pair<std::string, std::string>> binary_files;
};

// Pure dispatch: runs the experiment for the parsed config and returns the
// payload and sidecar blobs without touching the filesystem.
ExperimentOutput dispatch_experiment(const RunConfig& cfg);

struct RunOutcome {
  nlohmann::json envelope;
  std::string envelope_path;
  std::vector<std::string> files_written;
  bool ok = true; // false when a verify-style payload reports failures
};

// dispatch + envelope + sidecar writing under cfg.output.dir.
RunOutcome run(const RunConfig& cfg);

std::string format_double(double v);

} // namespace heatsheet
