#pragma once

#include "jhol/cli/scene.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace jhol::cli {

// Exit codes.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kParse = 2, kValidation = 3, kNumerical = 4, kUsage = 64 };

// {"value": v, "tol": tol}. Exact integers and counts carry tol 0.
nlohmann::json measured(double value, double tol);
nlohmann::json exact(long long value);

struct RunResult {
  int exit_code = kOk;
  nlohmann::json report;  // schema v1, no timestamps
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  std::vector<std::string> log;
};

const std::vector<std::string>& subcommand_names();

// Runs one subcommand. Errors are caught and mapped to exit codes; the
// report then carries {"status": "error", "error": {...}}.
RunResult run_command(const std::string& name, const Scene& scene, const Overrides& overrides = {});

// Loads the scene and runs; parse and load-validation errors become results.
RunResult run_scene_file(const std::string& name, const std::string& scene_path, const Overrides& overrides = {});

} // namespace jhol::cli
