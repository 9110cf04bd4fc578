#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "szloca/assignment.hpp"
#include "szloca/lifting.hpp"
#include "szloca/motion_filter.hpp"
#include "szloca/smoothing.hpp"

namespace szloca {

using TrackId = std::uint64_t;

enum class TrackLifecycle { Tentative, Confirmed, Lost };

std::string_view to_string(TrackLifecycle lifecycle);

struct TrackerParams {
  int n_init = 3;
  int max_age = 15;
  double gate_radius = 1.5;         // meters
  double process_accel_std = 1.0;   // m/s^2
  double measurement_std = 0.15;    // meters
  double initial_velocity_std = 2.0;  // m/s
  SmootherConfig smoother;

  void validate() const;
};

struct TrackState {
  TrackId track_id = 0;
  KinematicState kinematics;
  TrackLifecycle lifecycle = TrackLifecycle::Tentative;
  int hits = 0;
  int misses = 0;  // consecutive frames without a match
  double ground_y = 0.0;
  std::optional<std::vector<PlacedJoint>> last_skeleton3d;
  Vec3 smoothed_position = Vec3::Zero();
  PointSmoother smoother;

  [[nodiscard]] Vec3 position() const {
    return {kinematics.mean(0), ground_y, kinematics.mean(1)};
  }
};

/// What the tracker reports for each confirmed track in a frame.
struct Track3D {
  TrackId id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 smoothed = Vec3::Zero();
  Vec2 velocity = Vec2::Zero();  // (vx, vz)
  std::optional<std::vector<PlacedJoint>> skeleton;
  TrackLifecycle lifecycle = TrackLifecycle::Confirmed;
};

struct TrackFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<Track3D> tracks;
};

/// Gated optimal matching of predicted tracks to lifted detections by planar
/// distance. Rows of the result index `tracks`, columns index `detections`.
Assignment associate(std::span<const TrackState> tracks,
                     std::span<const LiftedDetection> detections, double gate_radius);

/// Identity-maintaining tracker. Single-threaded state machine: feed frames in
/// timestamp order.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  /// Throws Error(FrameOrder) if the timestamp does not increase.
  std::vector<Track3D> step(std::int64_t frame_index, double timestamp,
                            std::span<const LiftedDetection> detections);

  [[nodiscard]] const std::vector<TrackState>& tracks() const noexcept { return tracks_; }
  [[nodiscard]] const TrackerParams& params() const noexcept { return params_; }
  [[nodiscard]] TrackId next_id() const noexcept { return next_id_; }

 private:
  TrackerParams params_;
  std::vector<TrackState> tracks_;  // ordered by id
  TrackId next_id_ = 1;
  std::optional<double> last_timestamp_;
};

}  // namespace szloca
