#pragma once

// Synthetic person detectors (detection-level LiDAR and camera simulators)
// and the deterministic keypoint -> position pipeline.
//
// The LiDAR detector is simulated at the output of a leg-tracker style
// pipeline: per-human position estimates with isotropic noise, plus
// reflection-noise false positives as a Poisson process. The camera detector
// is FoV/range limited with noise growing affinely in range and emits no
// false positives.

#include <Eigen/Dense>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "socnav/geometry.hpp"
#include "socnav/human_model.hpp"

namespace socnav {

enum class Source { Lidar, Camera };

inline const char* to_string(Source s) {
  return s == Source::Lidar ? "lidar" : "camera";
}

// Timestamped position observation in the world/LiDAR frame.
struct Measurement {
  double t{0.0};
  Point2 pos;
  Source source{Source::Lidar};
  Eigen::Matrix2d noise_cov{Eigen::Matrix2d::Zero()};
};

enum class Joint { Hip = 0, Knee = 1, Ankle = 2 };

inline constexpr std::array<Joint, 3> kJointPriority = {Joint::Hip, Joint::Knee,
                                                        Joint::Ankle};

struct Keypoint {
  Point3 pos;  // camera frame, z > 0
  double confidence{0.0};
};

// Optional left/right keypoints for each of hip, knee, ankle.
struct KeypointSet {
  std::array<std::optional<Keypoint>, 3> left;
  std::array<std::optional<Keypoint>, 3> right;

  std::optional<Keypoint>& side(Joint j, bool is_left) {
    return is_left ? left[static_cast<int>(j)] : right[static_cast<int>(j)];
  }
  const std::optional<Keypoint>& side(Joint j, bool is_left) const {
    return is_left ? left[static_cast<int>(j)] : right[static_cast<int>(j)];
  }
};

struct LidarNoiseModel {
  double pos_std{0.05};             // meters, isotropic
  double false_positive_rate{0.1};  // events / second
  struct Box {
    double x_min{-4.0}, y_min{-4.0}, x_max{4.0}, y_max{4.0};
  } false_positive_box;
};

struct CameraNoiseModel {
  double std_at_1m{0.02};   // meters
  double std_slope{0.03};   // meters per meter of range beyond 1 m
  double fov{87.0 * std::numbers::pi / 180.0};
  double max_range{5.0};

  double std_at(double range) const {
    return std::max(std_at_1m + std_slope * (range - 1.0), 0.0);
  }
};

/// Midpoint of the left/right keypoints of one joint.
inline Point3 joint_position(const Point3& left, const Point3& right) {
  return {0.5 * (left.x + right.x), 0.5 * (left.y + right.y),
          0.5 * (left.z + right.z)};
}

struct SelectedJoint {
  Joint joint{Joint::Hip};
  Point3 pos;  // camera frame midpoint
};

/// Picks the highest-priority joint (hip > knee > ankle) whose left and right
/// keypoints both reach min_confidence; returns its midpoint. No qualifying
/// joint is an expected outcome, not an error.
inline std::optional<SelectedJoint> select_joint(const KeypointSet& k,
                                                 double min_confidence) {
  for (Joint j : kJointPriority) {
    const auto& l = k.side(j, true);
    const auto& r = k.side(j, false);
    if (l && r && l->confidence >= min_confidence &&
        r->confidence >= min_confidence) {
      return SelectedJoint{j, joint_position(l->pos, r->pos)};
    }
  }
  return std::nullopt;
}

/// Keypoints -> joint midpoint -> LiDAR frame, with the camera noise model
/// evaluated at the measured range.
inline std::optional<Measurement> camera_pipeline(const KeypointSet& k,
                                                  const Extrinsics& e,
                                                  double min_confidence,
                                                  const CameraNoiseModel& m,
                                                  double t) {
  const auto sel = select_joint(k, min_confidence);
  if (!sel) return std::nullopt;
  Measurement z;
  z.t = t;
  z.pos = camera_to_lidar(sel->pos, e);
  const double range = std::hypot(z.pos.x, z.pos.y);
  const double std = m.std_at(range);
  z.source = Source::Camera;
  z.noise_cov = std * std * Eigen::Matrix2d::Identity();
  return z;
}

// Detection-level sensor simulators. Each instance owns its RNG; streams are
// reproducible from the seed.

class LidarSim {
 public:
  LidarSim(const LidarNoiseModel& model, uint64_t seed)
      : model_(model), rng_(seed) {}

  /// One measurement per human (360 degree visibility, no range cut) plus
  /// Poisson false positives over the interval dt, uniform in the box.
  std::vector<Measurement> sample(const std::vector<HumanState>& humans,
                                  const Pose2D& /*robot*/, double t, double dt) {
    std::vector<Measurement> out;
    out.reserve(humans.size());
    const Eigen::Matrix2d cov =
        model_.pos_std * model_.pos_std * Eigen::Matrix2d::Identity();
    for (const auto& h : humans) {
      Measurement z;
      z.t = t;
      z.pos = {h.x + gauss(model_.pos_std), h.y + gauss(model_.pos_std)};
      z.source = Source::Lidar;
      z.noise_cov = cov;
      out.push_back(z);
    }
    if (model_.false_positive_rate > 0.0 && dt > 0.0) {
      std::poisson_distribution<int> count(model_.false_positive_rate * dt);
      const int n = count(rng_);
      const auto& b = model_.false_positive_box;
      for (int i = 0; i < n; ++i) {
        std::uniform_real_distribution<double> ux(b.x_min, b.x_max);
        std::uniform_real_distribution<double> uy(b.y_min, b.y_max);
        Measurement z;
        z.t = t;
        z.pos = {ux(rng_), uy(rng_)};
        z.source = Source::Lidar;
        z.noise_cov = cov;
        out.push_back(z);
      }
    }
    return out;
  }

 private:
  double gauss(double std) {
    if (std <= 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, std);
    return n(rng_);
  }

  LidarNoiseModel model_;
  std::mt19937_64 rng_;
};

class CameraSim {
 public:
  CameraSim(const CameraNoiseModel& model, const Extrinsics& extrinsics,
            uint64_t seed)
      : model_(model), ext_(extrinsics), rng_(seed) {}

  /// One measurement per human inside the FoV wedge and within max_range.
  /// Noise is applied to the camera-frame coordinates and mapped back through
  /// the calibration transform; no false positives.
  std::vector<Measurement> sample(const std::vector<HumanState>& humans,
                                  const Pose2D& robot, double t) {
    std::vector<Measurement> out;
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    for (const auto& h : humans) {
      const double wx = h.x - robot.x;
      const double wy = h.y - robot.y;
      const double xr = c * wx + s * wy;   // LiDAR/robot frame
      const double yr = -s * wx + c * wy;
      // Invert x_L = z_C + dx, y_L = x_C + dy (height plays no role).
      const double zc = xr - ext_.dx;
      const double xc = yr - ext_.dy;
      if (zc <= 0.0) continue;
      const double range = std::hypot(xc, zc);
      if (range > model_.max_range) continue;
      if (std::abs(std::atan2(xc, zc)) > 0.5 * model_.fov) continue;
      const double std = model_.std_at(range);
      const double zc_n = zc + gauss(std);
      const double xc_n = xc + gauss(std);
      const Point2 lidar = camera_to_lidar({xc_n, 0.0, zc_n}, ext_);
      Measurement z;
      z.t = t;
      z.pos = {robot.x + c * lidar.x - s * lidar.y,
               robot.y + s * lidar.x + c * lidar.y};
      z.source = Source::Camera;
      z.noise_cov = std * std * Eigen::Matrix2d::Identity();
      out.push_back(z);
    }
    return out;
  }

 private:
  double gauss(double std) {
    if (std <= 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, std);
    return n(rng_);
  }

  CameraNoiseModel model_;
  Extrinsics ext_;
  std::mt19937_64 rng_;
};

// Replay mode: keypoint records from a line-delimited text file, one keypoint
// per line: t,joint,side,x,y,z,confidence. Consecutive lines with equal t
// form one keypoint set.

struct TimedKeypointSet {
  double t{0.0};
  KeypointSet set;
};

inline std::vector<TimedKeypointSet> load_keypoint_log(std::istream& in) {
  std::vector<TimedKeypointSet> out;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("keypoint log line " + std::to_string(line_no) +
                             ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string field;
    std::array<std::string, 7> f;
    int i = 0;
    while (std::getline(ss, field, ',')) {
      if (i >= 7) fail("too many fields");
      f[i++] = field;
    }
    if (i != 7) fail("expected 7 fields (t,joint,side,x,y,z,confidence)");
    double t, x, y, z, conf;
    try {
      t = std::stod(f[0]);
      x = std::stod(f[3]);
      y = std::stod(f[4]);
      z = std::stod(f[5]);
      conf = std::stod(f[6]);
    } catch (const std::exception&) {
      fail("malformed number");
      throw;  // unreachable
    }
    Joint j;
    if (f[1] == "hip") j = Joint::Hip;
    else if (f[1] == "knee") j = Joint::Knee;
    else if (f[1] == "ankle") j = Joint::Ankle;
    else { fail("unknown joint '" + f[1] + "'"); throw; }
    bool is_left;
    if (f[2] == "left") is_left = true;
    else if (f[2] == "right") is_left = false;
    else { fail("unknown side '" + f[2] + "'"); throw; }
    if (!(z > 0.0)) fail("keypoint depth must be positive");
    if (out.empty() || out.back().t != t) {
      out.push_back({t, {}});
    }
    out.back().set.side(j, is_left) = Keypoint{{x, y, z}, conf};
  }
  return out;
}

inline std::vector<TimedKeypointSet> load_keypoint_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open keypoint log: " + path);
  return load_keypoint_log(in);
}

}  // namespace socnav
