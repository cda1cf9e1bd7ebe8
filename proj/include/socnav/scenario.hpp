#pragma once

// Declarative scenario files: YAML key tree with a validating loader.
// Unknown keys and out-of-range values are reported as a list of errors so a
// scenario can be schema-checked without running it.

#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "socnav/costmap.hpp"
#include "socnav/fusion.hpp"
#include "socnav/geometry.hpp"
#include "socnav/planner.hpp"
#include "socnav/sensing.hpp"

namespace socnav {

struct RatesConfig {
  double sim_hz{50.0};
  double lidar_hz{10.0};
  double camera_hz{15.0};
  double plan_hz{10.0};
};

struct ScriptedHuman {
  std::vector<Point2> waypoints;  // first entry is the start position
  double speed{1.0};              // m/s along the waypoint chain
};

struct MapConfig {
  std::optional<std::string> pgm;  // path, relative to the scenario file
  double resolution{0.05};
  Point2 origin{0.0, 0.0};
  int occupied_threshold{127};
  // Empty-map extent (used when no PGM is given).
  double width_m{0.0};
  double height_m{0.0};
  // Optional inline axis-aligned obstacles [x0, y0, x1, y1], meters.
  std::vector<std::array<double, 4>> boxes;
};

// The planning grid shares map.resolution; only the window geometry and the
// static inflation decay are separate knobs.
struct CostmapConfig {
  double window{8.0};      // local window side, meters
  double decay_rate{3.0};  // static-layer inflation decay, 1/m
};

struct Scenario {
  std::string name;
  uint64_t seed{0};
  double duration{60.0};
  double goal_tolerance{0.2};
  RatesConfig rates;
  MapConfig map;
  Pose2D robot_start;
  Point2 goal;
  RobotLimits robot;
  std::vector<ScriptedHuman> humans;
  LidarNoiseModel lidar;
  CameraNoiseModel camera;
  Extrinsics extrinsics;
  FilterParams fusion;
  SocialParams social;
  PlannerParams planner;
  CostmapConfig costmap;
};

namespace detail {

inline void require_keys(const YAML::Node& node, const std::string& section,
                         const std::set<std::string>& allowed,
                         std::vector<std::string>& errors) {
  if (!node || !node.IsMap()) return;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      errors.push_back("unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& key, T fallback) {
  if (node && node[key]) return node[key].as<T>();
  return fallback;
}

inline Point2 get_point(const YAML::Node& node, const Point2& fallback) {
  if (!node) return fallback;
  return {node[0].as<double>(), node[1].as<double>()};
}

}  // namespace detail

/// Parses a scenario; throws on malformed YAML, collects schema violations
/// for validate(). Relative PGM paths stay relative (resolved by the caller
/// against the scenario file's directory).
inline Scenario load_scenario(const YAML::Node& root,
                              std::vector<std::string>* schema_errors = nullptr) {
  using detail::get;
  std::vector<std::string> errs;
  detail::require_keys(root, "",
                       {"name", "seed", "duration", "goal_tolerance", "rates",
                        "map", "robot", "humans", "sensors", "fusion", "social",
                        "planner", "costmap"},
                       errs);
  Scenario sc;
  sc.name = get<std::string>(root, "name", "scenario");
  sc.seed = get<uint64_t>(root, "seed", 0);
  sc.duration = get(root, "duration", 60.0);
  sc.goal_tolerance = get(root, "goal_tolerance", 0.2);

  const auto rates = root["rates"];
  detail::require_keys(rates, "rates", {"sim", "lidar", "camera", "plan"}, errs);
  sc.rates.sim_hz = get(rates, "sim", 50.0);
  sc.rates.lidar_hz = get(rates, "lidar", 10.0);
  sc.rates.camera_hz = get(rates, "camera", 15.0);
  sc.rates.plan_hz = get(rates, "plan", 10.0);

  const auto map = root["map"];
  detail::require_keys(map, "map",
                       {"pgm", "resolution", "origin", "occupied_threshold",
                        "width", "height", "boxes"},
                       errs);
  if (map && map["pgm"]) sc.map.pgm = map["pgm"].as<std::string>();
  sc.map.resolution = get(map, "resolution", 0.05);
  sc.map.origin = detail::get_point(map ? map["origin"] : YAML::Node(), {0.0, 0.0});
  sc.map.occupied_threshold = get(map, "occupied_threshold", 127);
  sc.map.width_m = get(map, "width", 0.0);
  sc.map.height_m = get(map, "height", 0.0);
  if (map && map["boxes"]) {
    for (const auto& b : map["boxes"]) {
      sc.map.boxes.push_back({b[0].as<double>(), b[1].as<double>(),
                              b[2].as<double>(), b[3].as<double>()});
    }
  }

  const auto robot = root["robot"];
  detail::require_keys(robot, "robot",
                       {"start", "goal", "v_min", "v_max", "w_min", "w_max",
                        "accel_v", "accel_w", "radius"},
                       errs);
  if (robot && robot["start"]) {
    const auto s = robot["start"];
    sc.robot_start = {s[0].as<double>(), s[1].as<double>(),
                      s.size() > 2 ? normalize_angle(s[2].as<double>()) : 0.0};
  }
  sc.goal = detail::get_point(robot ? robot["goal"] : YAML::Node(), {0.0, 0.0});
  sc.robot.v_min = get(robot, "v_min", 0.0);
  sc.robot.v_max = get(robot, "v_max", 1.0);
  sc.robot.w_min = get(robot, "w_min", -2.0);
  sc.robot.w_max = get(robot, "w_max", 2.0);
  sc.robot.accel_v = get(robot, "accel_v", 1.0);
  sc.robot.accel_w = get(robot, "accel_w", 3.0);
  sc.robot.robot_radius = get(robot, "radius", 0.25);

  if (root["humans"]) {
    for (const auto& h : root["humans"]) {
      detail::require_keys(h, "humans[]", {"waypoints", "speed"}, errs);
      ScriptedHuman sh;
      if (h["waypoints"]) {
        for (const auto& w : h["waypoints"]) {
          sh.waypoints.push_back({w[0].as<double>(), w[1].as<double>()});
        }
      }
      sh.speed = get(h, "speed", 1.0);
      sc.humans.push_back(sh);
    }
  }

  const auto sensors = root["sensors"];
  detail::require_keys(sensors, "sensors", {"lidar", "camera"}, errs);
  const auto lidar = sensors ? sensors["lidar"] : YAML::Node();
  detail::require_keys(lidar, "sensors.lidar",
                       {"pos_std", "false_positive_rate", "fp_box"}, errs);
  sc.lidar.pos_std = get(lidar, "pos_std", 0.05);
  sc.lidar.false_positive_rate = get(lidar, "false_positive_rate", 0.1);
  if (lidar && lidar["fp_box"]) {
    const auto b = lidar["fp_box"];
    sc.lidar.false_positive_box = {b[0].as<double>(), b[1].as<double>(),
                                   b[2].as<double>(), b[3].as<double>()};
  }
  const auto camera = sensors ? sensors["camera"] : YAML::Node();
  detail::require_keys(camera, "sensors.camera",
                       {"std_at_1m", "std_slope", "fov_deg", "max_range",
                        "extrinsics"},
                       errs);
  sc.camera.std_at_1m = get(camera, "std_at_1m", 0.02);
  sc.camera.std_slope = get(camera, "std_slope", 0.03);
  sc.camera.fov = get(camera, "fov_deg", 87.0) * std::numbers::pi / 180.0;
  sc.camera.max_range = get(camera, "max_range", 5.0);
  if (camera && camera["extrinsics"]) {
    const auto e = camera["extrinsics"];
    detail::require_keys(e, "sensors.camera.extrinsics", {"dx", "dy"}, errs);
    sc.extrinsics.dx = get(e, "dx", 0.0);
    sc.extrinsics.dy = get(e, "dy", 0.0);
  }

  const auto fusion = root["fusion"];
  detail::require_keys(fusion, "fusion",
                       {"q_accel", "r_lidar_std", "r_camera_std",
                        "use_measurement_cov", "gate_radius", "max_misses",
                        "confirm_hits", "tentative_max_misses", "sensor_period",
                        "init_pos_std", "init_vel_std"},
                       errs);
  sc.fusion.q_accel = get(fusion, "q_accel", 0.5);
  const double rl = get(fusion, "r_lidar_std", 0.05);
  const double rc = get(fusion, "r_camera_std", 0.05);
  sc.fusion.R_lidar = rl * rl * Eigen::Matrix2d::Identity();
  sc.fusion.R_camera = rc * rc * Eigen::Matrix2d::Identity();
  sc.fusion.use_measurement_cov = get(fusion, "use_measurement_cov", true);
  sc.fusion.gate_radius = get(fusion, "gate_radius", 1.0);
  sc.fusion.max_misses = get(fusion, "max_misses", 10);
  sc.fusion.confirm_hits = get(fusion, "confirm_hits", 2);
  sc.fusion.tentative_max_misses = get(fusion, "tentative_max_misses", 2);
  sc.fusion.sensor_period = get(fusion, "sensor_period", 0.1);
  const double ip = get(fusion, "init_pos_std", 0.05);
  const double iv = get(fusion, "init_vel_std", 1.0);
  sc.fusion.init_cov =
      Eigen::Vector4d(ip * ip, ip * ip, iv * iv, iv * iv).asDiagonal();

  const auto social = root["social"];
  detail::require_keys(social, "social",
                       {"amplitude", "velocity_scale", "r_d", "static_threshold",
                        "enabled"},
                       errs);
  sc.social.amplitude = get(social, "amplitude", 254.0);
  sc.social.velocity_scale = get(social, "velocity_scale", 1.0);
  sc.social.r_d = get(social, "r_d", 0.3);
  sc.social.static_threshold = get(social, "static_threshold", 0.1);
  sc.social.enabled = get(social, "enabled", true);

  const auto planner = root["planner"];
  detail::require_keys(planner, "planner",
                       {"alpha", "beta", "gamma", "horizon", "dt", "dt_cmd",
                        "v_samples", "w_samples", "clear_dist_cap"},
                       errs);
  sc.planner.alpha = get(planner, "alpha", 0.8);
  sc.planner.beta = get(planner, "beta", 0.1);
  sc.planner.gamma = get(planner, "gamma", 0.1);
  sc.planner.horizon = get(planner, "horizon", 2.0);
  sc.planner.dt = get(planner, "dt", 0.1);
  sc.planner.dt_cmd = get(planner, "dt_cmd", 0.25);
  sc.planner.v_samples = get(planner, "v_samples", 11);
  sc.planner.w_samples = get(planner, "w_samples", 21);
  sc.planner.clear_dist_cap = get(planner, "clear_dist_cap", 10.0);

  const auto costmap = root["costmap"];
  detail::require_keys(costmap, "costmap", {"window", "decay_rate"}, errs);
  sc.costmap.window = get(costmap, "window", 8.0);
  sc.costmap.decay_rate = get(costmap, "decay_rate", 3.0);

  if (schema_errors) *schema_errors = std::move(errs);
  return sc;
}

inline Scenario load_scenario(const std::string& path,
                              std::vector<std::string>* schema_errors = nullptr) {
  return load_scenario(YAML::LoadFile(path), schema_errors);
}

/// Structural validation. `map_extent`, when known (after loading a PGM map),
/// enables the waypoint/start/goal bounds checks.
inline std::vector<std::string> validate(const Scenario& sc,
                                         const GridSpec* map_extent = nullptr) {
  std::vector<std::string> errors;
  auto check = [&errors](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  };
  check(sc.rates.sim_hz > 0, "rates.sim must be > 0");
  check(sc.rates.lidar_hz > 0, "rates.lidar must be > 0");
  check(sc.rates.camera_hz > 0, "rates.camera must be > 0");
  check(sc.rates.plan_hz > 0, "rates.plan must be > 0");
  check(sc.duration > 0, "duration must be > 0");
  check(sc.goal_tolerance > 0, "goal_tolerance must be > 0");
  check(sc.map.resolution > 0, "map.resolution must be > 0");
  if (!sc.map.pgm) {
    check(sc.map.width_m > 0 && sc.map.height_m > 0,
          "map without pgm needs width and height");
  }
  check(sc.robot.v_min <= sc.robot.v_max, "robot.v_min must be <= v_max");
  check(sc.robot.w_min <= sc.robot.w_max, "robot.w_min must be <= w_max");
  check(sc.robot.accel_v > 0, "robot.accel_v must be > 0");
  check(sc.robot.accel_w > 0, "robot.accel_w must be > 0");
  check(sc.robot.robot_radius > 0, "robot.radius must be > 0");
  check(sc.lidar.pos_std >= 0, "sensors.lidar.pos_std must be >= 0");
  check(sc.lidar.false_positive_rate >= 0,
        "sensors.lidar.false_positive_rate must be >= 0");
  check(sc.camera.std_at_1m >= 0, "sensors.camera.std_at_1m must be >= 0");
  check(sc.camera.std_slope >= 0, "sensors.camera.std_slope must be >= 0");
  check(sc.camera.fov > 0 && sc.camera.fov <= 2 * std::numbers::pi,
        "sensors.camera.fov_deg must be in (0, 360]");
  check(sc.camera.max_range > 0, "sensors.camera.max_range must be > 0");
  check(std::abs(sc.extrinsics.dx) < 10 && std::abs(sc.extrinsics.dy) < 10,
        "extrinsics out of robot-scale bounds");
  check(sc.fusion.q_accel >= 0, "fusion.q_accel must be >= 0");
  check(sc.fusion.gate_radius > 0, "fusion.gate_radius must be > 0");
  check(sc.fusion.max_misses >= 1, "fusion.max_misses must be >= 1");
  check(sc.fusion.sensor_period > 0, "fusion.sensor_period must be > 0");
  check(sc.social.amplitude > 0 && sc.social.amplitude <= 254,
        "social.amplitude must be in (0, 254]");
  check(sc.social.velocity_scale >= 0, "social.velocity_scale must be >= 0");
  check(sc.social.r_d > 0, "social.r_d must be > 0");
  check(sc.social.static_threshold > 0, "social.static_threshold must be > 0");
  check(sc.planner.alpha >= 0 && sc.planner.beta >= 0 && sc.planner.gamma >= 0,
        "planner weights must be >= 0");
  check(sc.planner.horizon > sc.planner.dt && sc.planner.dt > 0,
        "planner horizon must be > dt > 0");
  check(sc.planner.dt_cmd > 0, "planner.dt_cmd must be > 0");
  check(sc.planner.v_samples >= 2 && sc.planner.w_samples >= 2,
        "planner samples must be >= 2");
  check(sc.planner.clear_dist_cap > 0, "planner.clear_dist_cap must be > 0");
  check(sc.costmap.window > 0, "costmap.window must be > 0");
  for (const auto& h : sc.humans) {
    check(!h.waypoints.empty(), "human needs at least one waypoint");
    check(h.speed >= 0, "human speed must be >= 0");
  }
  if (map_extent) {
    const double x0 = map_extent->origin.x;
    const double y0 = map_extent->origin.y;
    const double x1 = x0 + map_extent->width * map_extent->resolution;
    const double y1 = y0 + map_extent->height * map_extent->resolution;
    auto inside = [&](const Point2& p) {
      return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    };
    check(inside({sc.robot_start.x, sc.robot_start.y}),
          "robot.start outside map bounds");
    check(inside(sc.goal), "robot.goal outside map bounds");
    for (size_t i = 0; i < sc.humans.size(); ++i) {
      for (const auto& w : sc.humans[i].waypoints) {
        if (!inside(w)) {
          errors.push_back("humans[" + std::to_string(i) +
                           "] waypoint outside map bounds");
          break;
        }
      }
    }
  }
  return errors;
}

// Extrinsics calibration file: two-key YAML, meters.
inline void save_extrinsics(const Extrinsics& e, std::ostream& out) {
  out << "dx: " << e.dx << "\n" << "dy: " << e.dy << "\n";
}

inline void save_extrinsics(const Extrinsics& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write extrinsics file: " + path);
  save_extrinsics(e, out);
}

inline Extrinsics load_extrinsics(const std::string& path) {
  const YAML::Node n = YAML::LoadFile(path);
  if (!n["dx"] || !n["dy"]) {
    throw std::runtime_error("extrinsics file needs dx and dy: " + path);
  }
  return {n["dx"].as<double>(), n["dy"].as<double>()};
}

}  // namespace socnav
