#pragma once

#include "jhol/cli/commands.hpp"

#include <filesystem>
#include <string>

namespace jhol::cli {

// Writes report.json, run_meta.json, log.txt and the data files of a run
// into `dir`, creating it when missing.
void write_run(const std::filesystem::path& dir, const RunResult& result, const std::string& scene_path);

// Entry point of the jhol executable; returns the process exit code.
int main_entry(int argc, char** argv);

} // namespace jhol::cli
