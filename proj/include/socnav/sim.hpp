#pragma once

// Deterministic discrete-time scenario runner binding sensing, fusion,
// costmap, and planner, with run logging, metrics, and file outputs.
//
// The loop is fixed-step at sim_hz. Sensors fire on their own schedules into
// a timestamp-ordered queue (15 Hz does not divide 50 Hz, so camera events
// land between ticks and are processed at the next tick with their scheduled
// timestamp, which keeps the fusion ingest contract and exercises true
// asynchrony). The planner reruns at plan_hz on a robot-centered window of
// the layered costmap.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/costmap.hpp"
#include "socnav/fusion.hpp"
#include "socnav/geometry.hpp"
#include "socnav/planner.hpp"
#include "socnav/scenario.hpp"
#include "socnav/sensing.hpp"

namespace socnav {

struct World {
  OccupancyGrid occupancy;
  Costmap static_costmap;  // inflated once at load
};

/// Resolves the scenario's map into an occupancy grid plus the inflated
/// static layer. `base_dir` anchors relative PGM paths.
inline World build_world(const Scenario& sc, const std::string& base_dir = ".") {
  World world;
  if (sc.map.pgm) {
    std::filesystem::path p(*sc.map.pgm);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    world.occupancy = load_occupancy_pgm(p.string(), sc.map.resolution,
                                         sc.map.origin, sc.map.occupied_threshold);
  } else {
    GridSpec spec;
    spec.origin = sc.map.origin;
    spec.resolution = sc.map.resolution;
    spec.width = std::max(1, static_cast<int>(std::lround(sc.map.width_m / sc.map.resolution)));
    spec.height = std::max(1, static_cast<int>(std::lround(sc.map.height_m / sc.map.resolution)));
    world.occupancy.spec = spec;
    world.occupancy.occupied.assign(static_cast<size_t>(spec.width) * spec.height, 0);
  }
  for (const auto& b : sc.map.boxes) {
    const auto& spec = world.occupancy.spec;
    for (int j = 0; j < spec.height; ++j) {
      for (int i = 0; i < spec.width; ++i) {
        const Point2 c = spec.cell_center(i, j);
        if (c.x >= b[0] && c.x <= b[2] && c.y >= b[1] && c.y <= b[3]) {
          world.occupancy.occupied[static_cast<size_t>(j) * spec.width + i] = 1;
        }
      }
    }
  }
  world.static_costmap =
      rasterize_static(world.occupancy.occupied, sc.robot.robot_radius,
                       world.occupancy.spec, sc.costmap.decay_rate);
  return world;
}

// Scripted ground-truth human: walks its waypoint chain at constant speed,
// clamps at a reached waypoint and proceeds next tick, holds at the last.
struct ScriptedHumanState {
  ScriptedHuman script;
  Point2 pos;
  size_t next_wp{1};
  double vx{0.0};
  double vy{0.0};

  explicit ScriptedHumanState(const ScriptedHuman& s)
      : script(s), pos(s.waypoints.empty() ? Point2{} : s.waypoints.front()) {}

  HumanState state() const { return {pos.x, pos.y, vx, vy}; }
};

inline void step_humans(std::vector<ScriptedHumanState>& humans, double dt) {
  for (auto& h : humans) {
    h.vx = 0.0;
    h.vy = 0.0;
    if (h.next_wp >= h.script.waypoints.size()) continue;
    const Point2 target = h.script.waypoints[h.next_wp];
    const double dx = target.x - h.pos.x;
    const double dy = target.y - h.pos.y;
    const double d = std::hypot(dx, dy);
    if (d < 1e-12) {
      ++h.next_wp;
      continue;
    }
    const double step = h.script.speed * dt;
    const double ux = dx / d;
    const double uy = dy / d;
    h.vx = ux * h.script.speed;
    h.vy = uy * h.script.speed;
    if (step < d) {
      h.pos.x += ux * step;
      h.pos.y += uy * step;
    } else {
      h.pos = target;
      ++h.next_wp;
    }
  }
}

/// Robot kinematics, shared with the planner rollout.
inline Pose2D step_robot(const Pose2D& pose, const Twist& u, double dt) {
  return step_unicycle(pose, u, dt);
}

struct TickRecord {
  double t{0.0};
  Pose2D robot;
  Twist cmd;
  std::vector<TrackSnapshot> tracks;
  std::vector<HumanState> truth;
  double min_clearance{std::numeric_limits<double>::infinity()};
  double social_cost{0.0};  // social-layer cost at the robot cell
  bool in_lethal{false};    // robot cell lethal in the latest master
};

struct PlanRecord {
  double t{0.0};
  int candidates{0};
  Twist chosen;
  double best_score{0.0};
  double clearance{0.0};
  bool recovery{false};
};

struct RunMeta {
  Point2 goal;
  double goal_tolerance{0.2};
  double r_d{0.3};
  double sim_dt{0.02};
  double duration{60.0};
  uint64_t seed{0};
};

struct RunLog {
  RunMeta meta;
  std::vector<TickRecord> ticks;
  std::vector<PlanRecord> plans;
};

struct Metrics {
  bool goal_reached{false};
  std::optional<double> time_to_goal;
  double path_length{0.0};
  std::optional<double> min_human_clearance;  // robot center to human center
  double personal_space_integral{0.0};        // cost * seconds
  std::optional<double> track_mse;            // m^2
};

inline Metrics compute_metrics(const RunLog& log) {
  if (log.ticks.empty()) throw std::invalid_argument("compute_metrics: empty log");
  Metrics m;
  const auto& last = log.ticks.back();
  m.goal_reached = distance({last.robot.x, last.robot.y}, log.meta.goal) <=
                   log.meta.goal_tolerance;
  if (m.goal_reached) m.time_to_goal = last.t;
  double min_clear = std::numeric_limits<double>::infinity();
  double mse_sum = 0.0;
  long mse_n = 0;
  for (size_t k = 0; k < log.ticks.size(); ++k) {
    const auto& tick = log.ticks[k];
    if (k > 0) {
      m.path_length += distance({tick.robot.x, tick.robot.y},
                                {log.ticks[k - 1].robot.x, log.ticks[k - 1].robot.y});
    }
    m.personal_space_integral += tick.social_cost * log.meta.sim_dt;
    for (const auto& h : tick.truth) {
      min_clear = std::min(min_clear,
                           distance({tick.robot.x, tick.robot.y}, h.position()));
      if (!tick.tracks.empty()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& tr : tick.tracks) {
          const double dx = tr.state.x - h.x;
          const double dy = tr.state.y - h.y;
          best = std::min(best, dx * dx + dy * dy);
        }
        mse_sum += best;
        ++mse_n;
      }
    }
  }
  if (std::isfinite(min_clear)) m.min_human_clearance = min_clear;
  if (mse_n > 0) m.track_mse = mse_sum / mse_n;
  return m;
}

struct RunResult {
  RunLog log;
  Metrics metrics;
  Costmap first_master;
  Costmap last_master;
};

/// Runs a scenario to goal or duration limit. Deterministic for a given seed:
/// the two detectors run on sub-seeds (seed, seed ^ 1).
inline RunResult run(const Scenario& sc, const World& world) {
  if (const auto errors = validate(sc, &world.occupancy.spec); !errors.empty()) {
    std::string what = "scenario invalid:";
    for (const auto& e : errors) what += "\n  " + e;
    throw std::invalid_argument(what);
  }

  const double sim_dt = 1.0 / sc.rates.sim_hz;
  const double lidar_dt = 1.0 / sc.rates.lidar_hz;
  const double camera_dt = 1.0 / sc.rates.camera_hz;
  const double plan_dt = 1.0 / sc.rates.plan_hz;
  const double eps = 1e-9;

  RunResult out;
  out.log.meta = {sc.goal, sc.goal_tolerance, sc.social.r_d,
                  sim_dt,  sc.duration,       sc.seed};

  Pose2D robot = sc.robot_start;
  Twist cmd;
  std::vector<ScriptedHumanState> humans;
  humans.reserve(sc.humans.size());
  for (const auto& h : sc.humans) humans.emplace_back(h);

  LidarSim lidar(sc.lidar, sc.seed);
  CameraSim camera(sc.camera, sc.extrinsics, sc.seed ^ 1ull);
  Tracker tracker(sc.fusion);

  long lidar_idx = 0, camera_idx = 0, plan_idx = 0;
  Costmap social_layer, master;
  bool have_master = false;

  for (long k = 0;; ++k) {
    const double t = k * sim_dt;
    if (t > sc.duration + eps) break;
    if (k > 0) {
      step_humans(humans, sim_dt);
      robot = step_robot(robot, cmd, sim_dt);
    }
    std::vector<HumanState> truth;
    truth.reserve(humans.size());
    for (const auto& h : humans) truth.push_back(h.state());

    // Due sensor events, timestamp-ordered (lidar before camera at equal t).
    struct Event {
      double t;
      Source source;
    };
    std::vector<Event> events;
    while (lidar_idx * lidar_dt <= t + eps) {
      events.push_back({lidar_idx * lidar_dt, Source::Lidar});
      ++lidar_idx;
    }
    while (camera_idx * camera_dt <= t + eps) {
      events.push_back({camera_idx * camera_dt, Source::Camera});
      ++camera_idx;
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      return a.t < b.t || (a.t == b.t && a.source < b.source);
    });
    for (const auto& ev : events) {
      const auto measurements =
          ev.source == Source::Lidar
              ? lidar.sample(truth, robot, ev.t, lidar_dt)
              : camera.sample(truth, robot, ev.t);
      for (const auto& z : measurements) tracker.ingest(z);
    }
    tracker.prune(t);

    if (plan_idx * plan_dt <= t + eps) {
      ++plan_idx;
      const auto snaps = tracker.snapshot(t);
      const GridSpec window =
          local_window_spec({robot.x, robot.y}, sc.costmap.window,
                            sc.map.resolution, world.occupancy.spec.origin);
      const Costmap static_layer = crop(world.static_costmap, window);
      social_layer = rasterize_social(humans_of(snaps), sc.social, window);
      master = sc.social.enabled ? merge({static_layer, social_layer})
                                 : static_layer;
      if (!have_master) {
        out.first_master = master;
        have_master = true;
      }
      const PlanResult plan_result =
          plan(robot, cmd, master, sc.goal, sc.planner, sc.robot);
      cmd = plan_result.twist;
      out.log.plans.push_back({t, plan_result.candidates, plan_result.twist,
                               plan_result.best_score, plan_result.clearance,
                               plan_result.recovery});
    }

    TickRecord tick;
    tick.t = t;
    tick.robot = robot;
    tick.cmd = cmd;
    tick.tracks = tracker.snapshot(t);
    tick.truth = truth;
    for (const auto& h : truth) {
      tick.min_clearance = std::min(
          tick.min_clearance, distance({robot.x, robot.y}, h.position()));
    }
    tick.social_cost =
        static_cast<double>(social_layer.query({robot.x, robot.y}).value_or(0));
    tick.in_lethal = master.query({robot.x, robot.y}).value_or(0) == kLethalCost;
    out.log.ticks.push_back(std::move(tick));

    if (distance({robot.x, robot.y}, sc.goal) <= sc.goal_tolerance) break;
  }

  out.last_master = master;
  out.metrics = compute_metrics(out.log);
  return out;
}

// ---- RunLog CSV ------------------------------------------------------------
//
// Long format, one typed row per record:
//   meta,0,goal_x,goal_y,goal_tol,r_d,sim_dt,duration,seed
//   tick,t,x,y,theta,v,w,min_clearance,social_cost,lethal
//   truth,t,index,x,y,vx,vy
//   track,t,id,x,y,vx,vy,trace_P
//   plan,t,candidates,v,w,best_G,clearance,recovery

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline void write_run_csv(const RunLog& log, std::ostream& out) {
  using detail::fmt;
  out << "record,t,f1,f2,f3,f4,f5,f6,f7,f8\n";
  const auto& m = log.meta;
  out << "meta,0," << fmt(m.goal.x) << ',' << fmt(m.goal.y) << ','
      << fmt(m.goal_tolerance) << ',' << fmt(m.r_d) << ',' << fmt(m.sim_dt)
      << ',' << fmt(m.duration) << ',' << m.seed << '\n';
  size_t pi = 0;
  for (const auto& tick : log.ticks) {
    out << "tick," << fmt(tick.t) << ',' << fmt(tick.robot.x) << ','
        << fmt(tick.robot.y) << ',' << fmt(tick.robot.theta) << ','
        << fmt(tick.cmd.v) << ',' << fmt(tick.cmd.w) << ','
        << fmt(tick.min_clearance) << ',' << fmt(tick.social_cost) << ','
        << (tick.in_lethal ? 1 : 0) << '\n';
    for (size_t i = 0; i < tick.truth.size(); ++i) {
      const auto& h = tick.truth[i];
      out << "truth," << fmt(tick.t) << ',' << i << ',' << fmt(h.x) << ','
          << fmt(h.y) << ',' << fmt(h.vx) << ',' << fmt(h.vy) << '\n';
    }
    for (const auto& tr : tick.tracks) {
      out << "track," << fmt(tick.t) << ',' << tr.id << ',' << fmt(tr.state.x)
          << ',' << fmt(tr.state.y) << ',' << fmt(tr.state.vx) << ','
          << fmt(tr.state.vy) << ',' << fmt(tr.cov_trace) << '\n';
    }
    while (pi < log.plans.size() && log.plans[pi].t <= tick.t + 1e-12) {
      const auto& p = log.plans[pi++];
      out << "plan," << fmt(p.t) << ',' << p.candidates << ',' << fmt(p.chosen.v)
          << ',' << fmt(p.chosen.w) << ',' << fmt(p.best_score) << ','
          << fmt(p.clearance) << ',' << (p.recovery ? 1 : 0) << '\n';
    }
  }
}

inline void write_run_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::runtime_error("cannot write run log: " + path);
  write_run_csv(log, out);
}

inline RunLog read_run_csv(std::istream& in) {
  RunLog log;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("run log: empty file");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    auto need = [&](size_t n) {
      if (f.size() < n) {
        throw std::runtime_error("run log line " + std::to_string(line_no) +
                                 ": expected " + std::to_string(n) + " fields");
      }
    };
    const auto& kind = f[0];
    if (kind == "meta") {
      need(9);
      log.meta.goal = {std::stod(f[2]), std::stod(f[3])};
      log.meta.goal_tolerance = std::stod(f[4]);
      log.meta.r_d = std::stod(f[5]);
      log.meta.sim_dt = std::stod(f[6]);
      log.meta.duration = std::stod(f[7]);
      log.meta.seed = std::stoull(f[8]);
    } else if (kind == "tick") {
      need(10);
      TickRecord tick;
      tick.t = std::stod(f[1]);
      tick.robot = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
      tick.cmd = {std::stod(f[5]), std::stod(f[6])};
      tick.min_clearance = std::stod(f[7]);
      tick.social_cost = std::stod(f[8]);
      tick.in_lethal = f[9] == "1";
      log.ticks.push_back(std::move(tick));
    } else if (kind == "truth") {
      need(7);
      if (log.ticks.empty()) throw std::runtime_error("run log: truth before tick");
      log.ticks.back().truth.push_back(
          {std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6])});
    } else if (kind == "track") {
      need(8);
      if (log.ticks.empty()) throw std::runtime_error("run log: track before tick");
      TrackSnapshot tr;
      tr.id = std::stoi(f[2]);
      tr.state = {std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                  std::stod(f[6])};
      tr.cov_trace = std::stod(f[7]);
      log.ticks.back().tracks.push_back(tr);
    } else if (kind == "plan") {
      need(8);
      log.plans.push_back({std::stod(f[1]), std::stoi(f[2]),
                           {std::stod(f[3]), std::stod(f[4])}, std::stod(f[5]),
                           std::stod(f[6]), f[7] == "1"});
    } else {
      throw std::runtime_error("run log line " + std::to_string(line_no) +
                               ": unknown record '" + kind + "'");
    }
  }
  if (log.ticks.empty()) throw std::runtime_error("run log: no ticks");
  return log;
}

inline RunLog read_run_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open run log: " + path);
  return read_run_csv(in);
}

inline nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["goal_reached"] = m.goal_reached;
  j["time_to_goal"] = m.time_to_goal ? nlohmann::json(*m.time_to_goal)
                                     : nlohmann::json(nullptr);
  j["path_length"] = m.path_length;
  j["min_human_clearance"] = m.min_human_clearance
                                 ? nlohmann::json(*m.min_human_clearance)
                                 : nlohmann::json(nullptr);
  j["personal_space_integral"] = m.personal_space_integral;
  j["track_mse"] =
      m.track_mse ? nlohmann::json(*m.track_mse) : nlohmann::json(nullptr);
  return j;
}

// ---- Trajectory SVG ---------------------------------------------------------

inline void write_trajectory_svg(const RunLog& log, const World& world,
                                 std::ostream& out) {
  const auto& spec = world.occupancy.spec;
  const double x0 = spec.origin.x;
  const double y1 = spec.origin.y + spec.height * spec.resolution;
  const double scale = 100.0;  // px per meter
  auto sx = [&](double x) { return (x - x0) * scale; };
  auto sy = [&](double y) { return (y1 - y) * scale; };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << spec.width * spec.resolution * scale << "\" height=\""
      << spec.height * spec.resolution * scale << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  size_t drawn = 0;
  for (int j = 0; j < spec.height && drawn < 50000; ++j) {
    for (int i = 0; i < spec.width && drawn < 50000; ++i) {
      if (!world.occupancy.occupied[static_cast<size_t>(j) * spec.width + i]) continue;
      const Point2 c = spec.cell_center(i, j);
      out << "<rect x=\"" << sx(c.x - 0.5 * spec.resolution) << "\" y=\""
          << sy(c.y + 0.5 * spec.resolution) << "\" width=\""
          << spec.resolution * scale << "\" height=\"" << spec.resolution * scale
          << "\" fill=\"#444\"/>\n";
      ++drawn;
    }
  }
  const size_t n_humans = log.ticks.empty() ? 0 : log.ticks.front().truth.size();
  const char* colors[] = {"#d62728", "#9467bd", "#8c564b", "#e377c2"};
  for (size_t h = 0; h < n_humans; ++h) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[h % 4]
        << "\" stroke-width=\"2\" stroke-dasharray=\"6 4\" points=\"";
    for (const auto& tick : log.ticks) {
      if (h < tick.truth.size()) {
        out << sx(tick.truth[h].x) << ',' << sy(tick.truth[h].y) << ' ';
      }
    }
    out << "\"/>\n";
  }
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"3\" points=\"";
  for (const auto& tick : log.ticks) {
    out << sx(tick.robot.x) << ',' << sy(tick.robot.y) << ' ';
  }
  out << "\"/>\n";
  if (!log.ticks.empty()) {
    out << "<circle cx=\"" << sx(log.ticks.front().robot.x) << "\" cy=\""
        << sy(log.ticks.front().robot.y)
        << "\" r=\"6\" fill=\"#1f77b4\"/>\n";
  }
  out << "<circle cx=\"" << sx(log.meta.goal.x) << "\" cy=\""
      << sy(log.meta.goal.y)
      << "\" r=\"" << log.meta.goal_tolerance * scale
      << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\"/>\n";
  out << "</svg>\n";
}

inline void write_trajectory_svg(const RunLog& log, const World& world,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  write_trajectory_svg(log, world, out);
}

}  // namespace socnav
