#pragma once

// Frames, planar transforms, and the camera->LiDAR extrinsic calibration.
//
// Frame conventions:
//   LiDAR/robot frame: x forward, y left, planar (z = 0; the LiDAR carries no
//   height information).
//   Camera frame: z = optical/forward axis, x = rightward, y = down. Under
//   this convention the calibration transform is a pure axis permutation plus
//   a planar translation (dx, dy); the camera is assumed axis-aligned with
//   the robot (no rotation).

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace socnav {

struct Point3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};
};

struct Point2 {
  double x{0.0};
  double y{0.0};
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Planar translation of the camera with respect to the LiDAR, meters.
struct Extrinsics {
  double dx{0.0};
  double dy{0.0};
};

// Wraps to (-pi, pi]; idempotent.
inline double normalize_angle(double a) {
  const double pi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

struct Pose2D {
  double x{0.0};
  double y{0.0};
  double theta{0.0};  // radians, (-pi, pi]
};

/// Projects a camera-frame point into the planar LiDAR frame:
/// x_L = z_C + dx, y_L = x_C + dy. Height (y_C) is discarded.
inline Point2 camera_to_lidar(const Point3& p, const Extrinsics& e) {
  return {p.z + e.dx, p.x + e.dy};
}

/// Solves the planar extrinsics from one marker sighting: the marker sits
/// straight ahead of the robot center at LiDAR-measured range d, and at
/// (x, y, z) in the camera frame. Then dx = d - z, dy = x.
inline Extrinsics solve_extrinsics(const Point3& marker_cam, double lidar_range) {
  if (!(lidar_range > 0.0) || !(marker_cam.z > 0.0)) {
    throw std::invalid_argument(
        "solve_extrinsics: range and marker depth must be positive");
  }
  return {lidar_range - marker_cam.z, marker_cam.x};
}

}  // namespace socnav
