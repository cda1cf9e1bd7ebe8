// socnav command line: scenario runner, calibration, metrics, validation.
//
// Exit codes for `run`: 0 goal reached, 2 duration limit hit, 1 error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "socnav/scenario.hpp"
#include "socnav/sim.hpp"

namespace {

constexpr const char* kVersion = "socnav 0.1.0";

int validate_scenario_file(const std::string& path) {
  std::vector<std::string> schema_errors;
  socnav::Scenario sc;
  try {
    sc = socnav::load_scenario(path, &schema_errors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto errors = schema_errors;
  const socnav::GridSpec* extent = nullptr;
  socnav::World world;
  try {
    world = socnav::build_world(
        sc, std::filesystem::path(path).parent_path().string());
    extent = &world.occupancy.spec;
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  for (const auto& e : socnav::validate(sc, extent)) errors.push_back(e);
  if (errors.empty()) {
    std::cout << "OK: " << path << "\n";
    return 0;
  }
  std::cerr << path << " is invalid:\n";
  for (const auto& e : errors) std::cerr << "  " << e << "\n";
  return 1;
}

int run_scenario(const std::string& scenario_path, std::optional<uint64_t> seed,
                 const std::string& out_dir,
                 const std::optional<std::string>& extrinsics_path) {
  std::vector<std::string> schema_errors;
  socnav::Scenario sc = socnav::load_scenario(scenario_path, &schema_errors);
  if (!schema_errors.empty()) {
    std::cerr << "scenario schema errors:\n";
    for (const auto& e : schema_errors) std::cerr << "  " << e << "\n";
    return 1;
  }
  if (seed) sc.seed = *seed;
  if (extrinsics_path) sc.extrinsics = socnav::load_extrinsics(*extrinsics_path);

  const socnav::World world = socnav::build_world(
      sc, std::filesystem::path(scenario_path).parent_path().string());
  const socnav::RunResult result = socnav::run(sc, world);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  socnav::write_run_csv(result.log, (dir / "run.csv").string());
  {
    std::ofstream mj(dir / "metrics.json");
    mj << socnav::metrics_json(result.metrics).dump(2) << "\n";
  }
  socnav::write_pgm(result.first_master, (dir / "costmap_first.pgm").string());
  socnav::write_pgm(result.last_master, (dir / "costmap_final.pgm").string());
  socnav::write_trajectory_svg(result.log, world, (dir / "trajectory.svg").string());

  std::cout << socnav::metrics_json(result.metrics).dump(2) << "\n";
  return result.metrics.goal_reached ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Socially aware navigation simulator"};
  app.set_version_flag("--version", kVersion);
  std::string validate_path;
  app.add_option("--validate", validate_path, "Schema-check a scenario file");

  auto* cmd_run = app.add_subcommand("run", "Run a scenario");
  std::string scenario_path, out_dir = "out";
  std::optional<uint64_t> seed;
  std::optional<std::string> extrinsics_path;
  cmd_run->add_option("--scenario", scenario_path, "Scenario YAML file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_run->add_option("--seed", seed, "Override the scenario seed");
  cmd_run->add_option("--out", out_dir, "Output directory");
  cmd_run->add_option("--extrinsics", extrinsics_path,
                      "Calibration file overriding the camera extrinsics");

  auto* cmd_cal = app.add_subcommand("calibrate", "Solve camera extrinsics");
  std::string marker_str;
  double range = 0.0;
  std::optional<std::string> cal_out;
  cmd_cal->add_option("--marker", marker_str, "Marker in camera frame, x,y,z")
      ->required();
  cmd_cal->add_option("--range", range, "LiDAR range to the marker, meters")
      ->required();
  cmd_cal->add_option("--out", cal_out, "Write the calibration file here");

  auto* cmd_metrics = app.add_subcommand("metrics", "Recompute metrics from a run log");
  std::string log_path;
  cmd_metrics->add_option("--log", log_path, "run.csv from a previous run")
      ->required()
      ->check(CLI::ExistingFile);

  auto* cmd_validate = app.add_subcommand("validate", "Schema-check a scenario");
  std::string validate_sub_path;
  cmd_validate->add_option("--scenario", validate_sub_path, "Scenario YAML file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!validate_path.empty()) return validate_scenario_file(validate_path);
    if (*cmd_validate) return validate_scenario_file(validate_sub_path);
    if (*cmd_run) return run_scenario(scenario_path, seed, out_dir, extrinsics_path);
    if (*cmd_cal) {
      socnav::Point3 marker;
      char c1 = 0, c2 = 0;
      std::stringstream ss(marker_str);
      if (!(ss >> marker.x >> c1 >> marker.y >> c2 >> marker.z) || c1 != ',' ||
          c2 != ',') {
        std::cerr << "error: --marker expects x,y,z\n";
        return 1;
      }
      const auto e = socnav::solve_extrinsics(marker, range);
      socnav::save_extrinsics(e, std::cout);
      if (cal_out) socnav::save_extrinsics(e, *cal_out);
      return 0;
    }
    if (*cmd_metrics) {
      const socnav::RunLog log = socnav::read_run_csv(log_path);
      std::cout << socnav::metrics_json(socnav::compute_metrics(log)).dump(2)
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << app.help();
  return 0;
}
