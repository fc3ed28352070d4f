#include "jhol/cli/app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace jhol::cli {

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace

void write_run(const std::filesystem::path& dir, const RunResult& result, const std::string& scene_path) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", result.report.dump(2) + "\n");
  const nlohmann::json meta{{"schema", "v1"},
                            {"timestamp", utc_timestamp()},
                            {"scene", scene_path},
                            {"exit_code", result.exit_code}};
  write_file(dir / "run_meta.json", meta.dump(2) + "\n");
  std::string log;
  for (const auto& line : result.log) log += line + "\n";
  write_file(dir / "log.txt", log);
  for (const auto& [name, text] : result.files) write_file(dir / name, text);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Numerical experiments with almost complex structures on R^4"};
  app.require_subcommand(1);
  std::string scene_path;
  std::string out_dir = "run";
  Overrides ov;
  std::uint64_t seed = 0;
  int grid = 0;
  double tol = 0.0;
  for (const std::string& name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--scene", scene_path, "Scene file (JSON)")->required();
    sub->add_option("--out", out_dir, "Run directory")->capture_default_str();
    sub->add_option("--seed", seed, "Seed override");
    sub->add_option("--grid", grid, "Grid resolution override")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Tolerance override")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) ov.seed = seed;
  if (sub->count("--grid") > 0) ov.grid = grid;
  if (sub->count("--tol") > 0) ov.tol = tol;
  const RunResult r = run_scene_file(sub->get_name(), scene_path, ov);
  try {
    write_run(out_dir, r, scene_path);
  } catch (const std::exception& e) {
    std::cerr << "jhol: " << e.what() << "\n";
    return kUsage;
  }
  for (const auto& line : r.log) std::cout << line << "\n";
  return r.exit_code;
}

} // namespace jhol::cli
