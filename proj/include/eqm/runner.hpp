#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace eqm {

// Exit-code contract: 0 success, 1 error (bad config, missing input, internal
// failure), 2 ran fine but a declared diagnostic threshold was exceeded.
struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> messages;
};

// Executes one scenario and writes its artifacts (plus manifest.json) into
// out_dir. Recognized kinds: equilibrium, flow, gas, diagnostics, selftest.
RunOutcome run_scenario(const nlohmann::json& scenario, const std::string& out_dir);

RunOutcome run_scenario_file(const std::string& scenario_path, const std::string& out_dir);

// Byte-compares the artifacts of two runs; manifest wall time is excluded
// (it is the one intentionally non-reproducible field).
RunOutcome compare_runs(const std::string& dir_a, const std::string& dir_b);

RunOutcome run_selftest();

}  // namespace eqm
