#pragma once

// Personal-space model: variance schedule over human speed and the
// asymmetric Gaussian cost field consumed by the social costmap layer.

#include <cmath>
#include <stdexcept>

#include "socnav/geometry.hpp"

namespace socnav {

// Tracked human: planar position and velocity in the world/LiDAR frame.
struct HumanState {
  double x{0.0};
  double y{0.0};
  double vx{0.0};
  double vy{0.0};

  double speed() const { return std::hypot(vx, vy); }
  double heading() const { return std::atan2(vy, vx); }
  Point2 position() const { return {x, y}; }
};

enum class MotionKind { Static, Moving };

struct Motion {
  MotionKind kind{MotionKind::Static};
  double heading{0.0};  // valid only when kind == Moving
};

inline Motion classify_motion(const HumanState& h, double static_threshold) {
  if (!(static_threshold > 0.0)) {
    throw std::domain_error("classify_motion: threshold must be positive");
  }
  if (h.speed() <= static_threshold) return {MotionKind::Static, 0.0};
  return {MotionKind::Moving, h.heading()};
}

// Sigmas of the personal-space Gaussian, meters. sigma_h points along the
// heading, sigma_r rearward, sigma_s laterally.
struct PersonalSpaceParams {
  double sigma_h{0.5};
  double sigma_s{0.5 * 2.0 / 3.0};
  double sigma_r{0.25};
  double amplitude{254.0};     // peak cost on the 0..255 scale (255 is lethal)
  double velocity_scale{1.0};
};

struct PhysicalDisk {
  double radius{0.3};
};

// A static person keeps a round personal space at the schedule floor.
inline constexpr double kStaticSigma = 0.5;

/// sigma_h = max(2 * velocity_scale * speed, 0.5), sigma_s = (2/3) sigma_h,
/// sigma_r = sigma_h / 2.
inline PersonalSpaceParams variance_schedule(double speed, double velocity_scale) {
  if (speed < 0.0) throw std::domain_error("variance_schedule: negative speed");
  PersonalSpaceParams p;
  p.velocity_scale = velocity_scale;
  p.sigma_h = std::max(2.0 * velocity_scale * speed, 0.5);
  p.sigma_s = (2.0 / 3.0) * p.sigma_h;
  p.sigma_r = 0.5 * p.sigma_h;
  return p;
}

/// Personal-space cost at query point q. Peak = amplitude at the human
/// center. Moving person: offsets are rotated into the heading frame and the
/// along-heading sigma is sigma_h ahead, sigma_r behind, sigma_s sideways
/// (egg shape). Static person: symmetric Gaussian, sigma = 0.5 m.
inline double personal_space_cost(const HumanState& h, const Point2& q,
                                  const PersonalSpaceParams& p,
                                  double static_threshold = 0.1) {
  const double ox = q.x - h.x;
  const double oy = q.y - h.y;
  const Motion m = classify_motion(h, static_threshold);
  if (m.kind == MotionKind::Static) {
    const double d2 = ox * ox + oy * oy;
    return p.amplitude * std::exp(-d2 / (2.0 * kStaticSigma * kStaticSigma));
  }
  const double c = std::cos(m.heading);
  const double s = std::sin(m.heading);
  const double fx = c * ox + s * oy;   // along heading
  const double fy = -s * ox + c * oy;  // lateral
  const double sx = fx >= 0.0 ? p.sigma_h : p.sigma_r;
  return p.amplitude * std::exp(-(fx * fx / (2.0 * sx * sx) +
                                  fy * fy / (2.0 * p.sigma_s * p.sigma_s)));
}

}  // namespace socnav
