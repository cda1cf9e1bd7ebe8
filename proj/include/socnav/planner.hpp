#pragma once

// Dynamic window approach: differential-drive rollout, velocity-set algebra,
// clearance along the trajectory, admissibility under braking limits, and
// weighted objective maximization.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "socnav/costmap.hpp"
#include "socnav/geometry.hpp"

namespace socnav {

struct Twist {
  double v{0.0};  // m/s
  double w{0.0};  // rad/s
};

struct RobotLimits {
  double v_min{0.0};
  double v_max{1.0};
  double w_min{-2.0};
  double w_max{2.0};
  double accel_v{1.0};  // also the braking deceleration
  double accel_w{3.0};
  double robot_radius{0.25};
};

struct PlannerParams {
  double alpha{0.8};  // heading weight
  double beta{0.1};   // clearance weight
  double gamma{0.1};  // velocity weight
  double horizon{2.0};        // rollout time, seconds
  double dt{0.1};             // rollout step, seconds
  double dt_cmd{0.25};        // command interval for the dynamic window
  int v_samples{11};
  int w_samples{21};
  double clear_dist_cap{10.0};  // "large constant" when no obstacle is met
};

using Trajectory = std::vector<Pose2D>;

/// One Euler step of the differential-drive kinematics:
/// x += v dt cos(theta), y += v dt sin(theta), theta += w dt.
inline Pose2D step_unicycle(const Pose2D& pose, const Twist& u, double dt) {
  Pose2D next;
  next.x = pose.x + u.v * dt * std::cos(pose.theta);
  next.y = pose.y + u.v * dt * std::sin(pose.theta);
  next.theta = normalize_angle(pose.theta + u.w * dt);
  return next;
}

/// Forward-simulates a constant twist for ceil(T/dt) steps; the returned
/// trajectory includes the start pose.
inline Trajectory rollout(const Pose2D& start, const Twist& u, double horizon,
                          double dt) {
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-9)));
  Trajectory traj;
  traj.reserve(steps + 1);
  traj.push_back(start);
  for (int k = 0; k < steps; ++k) {
    traj.push_back(step_unicycle(traj.back(), u, dt));
  }
  return traj;
}

// Velocity box V_s ∩ V_d.
struct VelocityWindow {
  double v_lo{0.0}, v_hi{0.0};
  double w_lo{0.0}, w_hi{0.0};

  bool contains(const Twist& u, double eps = 1e-9) const {
    return u.v >= v_lo - eps && u.v <= v_hi + eps && u.w >= w_lo - eps &&
           u.w <= w_hi + eps;
  }
};

/// Velocities reachable from the current twist within dt_cmd under the
/// acceleration limits, clipped to the static bounds.
inline VelocityWindow dynamic_window(const Twist& current,
                                     const RobotLimits& limits,
                                     double dt_cmd) {
  VelocityWindow win;
  win.v_lo = std::max(limits.v_min, current.v - limits.accel_v * dt_cmd);
  win.v_hi = std::min(limits.v_max, current.v + limits.accel_v * dt_cmd);
  win.w_lo = std::max(limits.w_min, current.w - limits.accel_w * dt_cmd);
  win.w_hi = std::min(limits.w_max, current.w + limits.accel_w * dt_cmd);
  return win;
}

namespace detail {

// Disk footprint vs lethal cells, cell centers sampled; out-of-bounds cells
// count as lethal.
inline bool footprint_collides(const Costmap& map, const Point2& center,
                               double radius) {
  const auto& spec = map.spec();
  const double res = spec.resolution;
  const int i0 = static_cast<int>(std::floor((center.x - radius - spec.origin.x) / res));
  const int i1 = static_cast<int>(std::floor((center.x + radius - spec.origin.x) / res));
  const int j0 = static_cast<int>(std::floor((center.y - radius - spec.origin.y) / res));
  const int j1 = static_cast<int>(std::floor((center.y + radius - spec.origin.y) / res));
  const double r2 = radius * radius;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Point2 c = spec.cell_center(i, j);
      const double dx = c.x - center.x;
      const double dy = c.y - center.y;
      if (dx * dx + dy * dy > r2) continue;
      if (!spec.contains(i, j)) return true;
      if (map.at(i, j) == kLethalCost) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Arc length along the trajectory to the first pose whose footprint touches
/// a lethal cell; clear_dist_cap if none. A start pose in collision gives 0.
inline double clearance(const Trajectory& traj, const Costmap& master,
                        double robot_radius, double clear_dist_cap) {
  double arc = 0.0;
  for (size_t k = 0; k < traj.size(); ++k) {
    if (k > 0) {
      arc += std::hypot(traj[k].x - traj[k - 1].x, traj[k].y - traj[k - 1].y);
    }
    if (detail::footprint_collides(master, {traj[k].x, traj[k].y}, robot_radius)) {
      return arc;
    }
  }
  return clear_dist_cap;
}

/// Braking admissibility: |v| <= sqrt(2 clear accel_v) and
/// |w| <= sqrt(2 clear accel_w).
inline bool admissible(const Twist& u, double clear, const RobotLimits& limits) {
  const double v_cap = std::sqrt(2.0 * clear * limits.accel_v);
  const double w_cap = std::sqrt(2.0 * clear * limits.accel_w);
  return std::abs(u.v) <= v_cap && std::abs(u.w) <= w_cap;
}

/// Misalignment between the final rollout heading and the goal bearing,
/// degrees in [0, 180]. Zero when the final pose sits on the goal.
inline double goal_heading_error_deg(const Pose2D& final_pose, const Point2& goal) {
  const double dx = goal.x - final_pose.x;
  const double dy = goal.y - final_pose.y;
  if (std::hypot(dx, dy) < 1e-9) return 0.0;
  const double bearing = std::atan2(dy, dx);
  return std::abs(normalize_angle(bearing - final_pose.theta)) * 180.0 /
         std::numbers::pi;
}

/// Objective G = alpha*heading + beta*dist + gamma*velocity with each term
/// normalized to [0,1]: heading/180, clearance/cap, |v|/v_max.
inline double score(const Twist& u, const Trajectory& traj, double clear,
                    const Point2& goal, const PlannerParams& params,
                    const RobotLimits& limits) {
  const double h = (180.0 - goal_heading_error_deg(traj.back(), goal)) / 180.0;
  const double d = std::min(clear, params.clear_dist_cap) / params.clear_dist_cap;
  const double vel =
      limits.v_max > 0.0 ? std::min(std::abs(u.v) / limits.v_max, 1.0) : 0.0;
  return params.alpha * h + params.beta * d + params.gamma * vel;
}

struct PlanResult {
  Twist twist;
  bool recovery{false};    // no admissible candidate existed
  int candidates{0};       // candidates evaluated
  double best_score{0.0};  // G of the chosen candidate (0 on recovery)
  double clearance{0.0};   // measured clearance of the chosen candidate
};

/// Samples the dynamic window, discards inadmissible candidates, and returns
/// the argmax of G. Ties break toward smaller |w|, then smaller |v - v_cur|.
/// With no admissible candidate the robot stops translation and rotates
/// toward the goal as fast as the in-place clearance admits.
inline PlanResult plan(const Pose2D& robot, const Twist& current,
                       const Costmap& master, const Point2& goal,
                       const PlannerParams& params, const RobotLimits& limits) {
  const VelocityWindow win = dynamic_window(current, limits, params.dt_cmd);
  const int nv = std::max(2, params.v_samples);
  const int nw = std::max(2, params.w_samples);

  PlanResult result;
  bool found = false;
  double best_g = 0.0, best_abs_w = 0.0, best_dv = 0.0;
  for (int iv = 0; iv < nv; ++iv) {
    const double v = win.v_lo + (win.v_hi - win.v_lo) * iv / (nv - 1);
    for (int iw = 0; iw < nw; ++iw) {
      const double w = win.w_lo + (win.w_hi - win.w_lo) * iw / (nw - 1);
      const Twist u{v, w};
      const Trajectory traj = rollout(robot, u, params.horizon, params.dt);
      const double clear =
          clearance(traj, master, limits.robot_radius, params.clear_dist_cap);
      ++result.candidates;
      if (!admissible(u, clear, limits)) continue;
      const double g = score(u, traj, clear, goal, params, limits);
      const double abs_w = std::abs(w);
      const double dv = std::abs(v - current.v);
      const bool better =
          !found || g > best_g ||
          (g == best_g && (abs_w < best_abs_w ||
                           (abs_w == best_abs_w && dv < best_dv)));
      if (better) {
        found = true;
        best_g = g;
        best_abs_w = abs_w;
        best_dv = dv;
        result.twist = u;
        result.best_score = g;
        result.clearance = clear;
      }
    }
  }
  if (found) return result;

  // Empty V: stop and rotate toward the goal, bounded by what an in-place
  // rotation admits (cap if the start pose is free, zero if it is not).
  result.recovery = true;
  const bool start_blocked =
      detail::footprint_collides(master, {robot.x, robot.y}, limits.robot_radius);
  const double clear_inplace = start_blocked ? 0.0 : params.clear_dist_cap;
  const double w_adm = std::sqrt(2.0 * clear_inplace * limits.accel_w);
  const double bearing = std::atan2(goal.y - robot.y, goal.x - robot.x);
  const double err = normalize_angle(bearing - robot.theta);
  double w = 0.0;
  if (err >= 0.0) {
    w = std::min({limits.w_max, w_adm});
    w = std::max(w, 0.0);
  } else {
    w = std::max({limits.w_min, -w_adm});
    w = std::min(w, 0.0);
  }
  result.twist = {0.0, w};
  result.best_score = 0.0;
  result.clearance = clear_inplace;
  return result;
}

}  // namespace socnav
