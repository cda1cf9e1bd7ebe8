#pragma once

// Asynchronous Kalman fusion of LiDAR and camera person measurements.
//
// One constant-velocity filter per track, state (x, y, vx, vy). Measurements
// from both sensors arrive as a single timestamp-ordered stream and are
// applied in arrival order, each with its own noise covariance. Association
// is greedy nearest-neighbor with a Euclidean gate; unassociated measurements
// spawn tentative tracks which die quickly unless confirmed by further hits
// (reflection-noise false positives are single detections).

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "socnav/human_model.hpp"
#include "socnav/sensing.hpp"

namespace socnav {

struct KalmanTrack {
  int id{0};
  Eigen::Vector4d state{Eigen::Vector4d::Zero()};  // x, y, vx, vy
  Eigen::Matrix4d cov{Eigen::Matrix4d::Identity()};
  double t{0.0};            // state epoch
  double last_update_t{0.0};  // time of the last measurement update
  int hits{0};              // measurement updates received
  int miss_count{0};        // elapsed nominal periods since last update
};

struct FilterParams {
  double q_accel{0.5};  // white-noise acceleration density, (m/s^2)^2
  Eigen::Matrix2d R_lidar{0.05 * 0.05 * Eigen::Matrix2d::Identity()};
  Eigen::Matrix2d R_camera{0.05 * 0.05 * Eigen::Matrix2d::Identity()};
  bool use_measurement_cov{true};  // prefer the cov carried by the measurement
  double gate_radius{1.0};         // meters, Euclidean association gate
  int max_misses{10};              // confirmed-track prune horizon, periods
  int confirm_hits{2};             // updates needed to confirm a track
  int tentative_max_misses{2};     // tentative-track prune horizon, periods
  double sensor_period{0.1};       // nominal expected period, seconds
  Eigen::Matrix4d init_cov{
      Eigen::Vector4d(0.05 * 0.05, 0.05 * 0.05, 1.0, 1.0).asDiagonal()};
};

/// Constant-velocity transition over dt.
inline Eigen::Matrix4d cv_transition(double dt) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

/// White-noise-acceleration process noise over dt, per axis
/// [dt^3/3, dt^2/2; dt^2/2, dt] * q_accel.
inline Eigen::Matrix4d process_noise(double dt, double q_accel) {
  const double q3 = q_accel * dt * dt * dt / 3.0;
  const double q2 = q_accel * dt * dt / 2.0;
  const double q1 = q_accel * dt;
  Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
  q(0, 0) = q3;
  q(1, 1) = q3;
  q(0, 2) = q2;
  q(2, 0) = q2;
  q(1, 3) = q2;
  q(3, 1) = q2;
  q(2, 2) = q1;
  q(3, 3) = q1;
  return q;
}

/// A-priori predict to t_now. The control term B*u is identically zero
/// (humans take no commands). Throws on negative dt: the caller sequences.
inline KalmanTrack predict(const KalmanTrack& track, double t_now,
                           double q_accel) {
  const double dt = t_now - track.t;
  if (dt < 0.0) {
    throw std::invalid_argument("predict: out-of-order timestamp");
  }
  const Eigen::Matrix4d a = cv_transition(dt);
  KalmanTrack out = track;
  out.state = a * track.state + Eigen::Vector4d::Zero();  // + B*u, u = 0
  out.cov = a * track.cov * a.transpose() + process_noise(dt, q_accel);
  out.t = t_now;
  return out;
}

/// A-posteriori update with a position measurement. H = [I2 | 0]. The
/// covariance uses the Joseph form, algebraically equal to (I - KH)P for the
/// optimal gain but symmetric PSD under floating point.
inline KalmanTrack update(const KalmanTrack& track, const Eigen::Vector2d& z,
                          const Eigen::Matrix2d& R) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d s = h * track.cov * h.transpose() + R;
  const Eigen::Matrix<double, 4, 2> k = track.cov * h.transpose() * s.inverse();
  KalmanTrack out = track;
  out.state = track.state + k * (z - h * track.state);
  const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - k * h;
  out.cov = ikh * track.cov * ikh.transpose() + k * R * k.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

// Immutable view of one live track.
struct TrackSnapshot {
  int id{0};
  HumanState state;
  double cov_trace{0.0};
};

class Tracker {
 public:
  explicit Tracker(const FilterParams& params = {}) : params_(params) {}

  /// Applies one measurement: predicts every track to z.t, associates z to
  /// the nearest track within the gate, updates it (or spawns a new track at
  /// z with zero velocity). Measurements must arrive in nondecreasing t.
  void ingest(const Measurement& z) {
    if (z.t < last_t_) {
      throw std::invalid_argument("ingest: out-of-order timestamp");
    }
    last_t_ = z.t;
    for (auto& track : tracks_) {
      track = predict(track, z.t, params_.q_accel);
    }
    const Eigen::Vector2d pos(z.pos.x, z.pos.y);
    KalmanTrack* best = nullptr;
    double best_d = params_.gate_radius;
    for (auto& track : tracks_) {
      const double d = (track.state.head<2>() - pos).norm();
      if (d <= best_d) {
        best_d = d;
        best = &track;
      }
    }
    if (best) {
      *best = update(*best, pos, effective_r(z));
      best->last_update_t = z.t;
      ++best->hits;
    } else {
      KalmanTrack track;
      track.id = next_id_++;
      track.state << z.pos.x, z.pos.y, 0.0, 0.0;
      track.cov = params_.init_cov;
      track.t = z.t;
      track.last_update_t = z.t;
      track.hits = 1;
      tracks_.push_back(track);
    }
  }

  /// Drops tracks not updated for their prune horizon: max_misses nominal
  /// periods once confirmed, tentative_max_misses before that.
  void prune(double t_now) {
    std::vector<KalmanTrack> kept;
    kept.reserve(tracks_.size());
    for (auto& track : tracks_) {
      track.miss_count = static_cast<int>(
          std::floor((t_now - track.last_update_t) / params_.sensor_period +
                     1e-9));
      const int limit = track.hits >= params_.confirm_hits
                            ? params_.max_misses
                            : params_.tentative_max_misses;
      if (track.miss_count < limit) kept.push_back(track);
    }
    tracks_ = std::move(kept);
  }

  /// Live tracks extrapolated to t_now, without mutating the filter.
  std::vector<TrackSnapshot> snapshot(double t_now) const {
    std::vector<TrackSnapshot> out;
    out.reserve(tracks_.size());
    for (const auto& track : tracks_) {
      Eigen::Vector4d s = track.state;
      double trace = track.cov.trace();
      if (t_now > track.t) {
        const KalmanTrack p = predict(track, t_now, params_.q_accel);
        s = p.state;
        trace = p.cov.trace();
      }
      out.push_back({track.id, {s(0), s(1), s(2), s(3)}, trace});
    }
    return out;
  }

  const std::vector<KalmanTrack>& tracks() const { return tracks_; }
  const FilterParams& params() const { return params_; }

 private:
  Eigen::Matrix2d effective_r(const Measurement& z) const {
    if (params_.use_measurement_cov && z.noise_cov.trace() > 0.0) {
      return z.noise_cov;
    }
    return z.source == Source::Lidar ? params_.R_lidar : params_.R_camera;
  }

  FilterParams params_;
  std::vector<KalmanTrack> tracks_;
  int next_id_{0};
  double last_t_{0.0};
};

/// Strips snapshots down to the human states the costmap consumes.
inline std::vector<HumanState> humans_of(const std::vector<TrackSnapshot>& s) {
  std::vector<HumanState> out;
  out.reserve(s.size());
  for (const auto& t : s) out.push_back(t.state);
  return out;
}

}  // namespace socnav
