#include <cmath>
#include <sstream>
#include <utility>

#include "szloca/error.hpp"
#include "szloca/tracking.hpp"

namespace szloca {

std::string_view to_string(TrackLifecycle lifecycle) {
  switch (lifecycle) {
    case TrackLifecycle::Tentative:
      return "tentative";
    case TrackLifecycle::Confirmed:
      return "confirmed";
    case TrackLifecycle::Lost:
      return "lost";
  }
  return "unknown";
}

void TrackerParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (n_init < 1 || max_age < 1) {
    throw Error(ErrorCode::InvalidConfig, "tracker n_init and max_age must be >= 1");
  }
  if (!positive(gate_radius) || !positive(process_accel_std) || !positive(measurement_std) ||
      !positive(initial_velocity_std)) {
    throw Error(ErrorCode::InvalidConfig, "tracker noise parameters and gate must be positive");
  }
  smoother.validate();
}

Assignment associate(std::span<const TrackState> tracks,
                     std::span<const LiftedDetection> detections, double gate_radius) {
  Eigen::MatrixXd cost(static_cast<Eigen::Index>(tracks.size()),
                       static_cast<Eigen::Index>(detections.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Vec2 p = tracks[i].kinematics.position();
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const Vec3& g = detections[j].ground_point;
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Vec2(g.x() - p.x(), g.z() - p.y()).norm();
    }
  }
  return solve_gated_assignment(cost, gate_radius);
}

Tracker::Tracker(TrackerParams params) : params_(std::move(params)) { params_.validate(); }

std::vector<Track3D> Tracker::step(std::int64_t frame_index, double timestamp,
                                   std::span<const LiftedDetection> detections) {
  if (!std::isfinite(timestamp) || (last_timestamp_ && !(timestamp > *last_timestamp_))) {
    std::ostringstream msg;
    msg << "frame " << frame_index << ": timestamp " << timestamp
        << " does not increase past the previous frame";
    throw Error(ErrorCode::FrameOrder, msg.str());
  }
  if (last_timestamp_) {
    const double dt = timestamp - *last_timestamp_;
    for (auto& track : tracks_) {
      track.kinematics = predict(track.kinematics, dt, params_.process_accel_std);
    }
  }
  last_timestamp_ = timestamp;

  const Assignment match = associate(tracks_, detections, params_.gate_radius);

  for (const auto& [ti, di] : match.pairs) {
    TrackState& track = tracks_[ti];
    const LiftedDetection& det = detections[di];
    track.kinematics = update(track.kinematics, Vec2(det.ground_point.x(), det.ground_point.z()),
                              params_.measurement_std);
    track.ground_y = det.ground_point.y();
    track.last_skeleton3d = det.skeleton3d;
    ++track.hits;
    track.misses = 0;
    track.lifecycle =
        track.hits >= params_.n_init ? TrackLifecycle::Confirmed : TrackLifecycle::Tentative;
    track.smoothed_position = track.smoother.smooth(track.position(), timestamp);
  }
  for (std::size_t ti : match.unmatched_rows) {
    TrackState& track = tracks_[ti];
    ++track.misses;
    if (track.hits >= params_.n_init) track.lifecycle = TrackLifecycle::Lost;
  }
  std::erase_if(tracks_, [&](const TrackState& t) { return t.misses > params_.max_age; });

  for (std::size_t di : match.unmatched_cols) {
    const LiftedDetection& det = detections[di];
    TrackState track;
    track.track_id = next_id_++;
    track.kinematics =
        KinematicState::at_rest(Vec2(det.ground_point.x(), det.ground_point.z()),
                                params_.measurement_std, params_.initial_velocity_std);
    track.ground_y = det.ground_point.y();
    track.last_skeleton3d = det.skeleton3d;
    track.hits = 1;
    track.lifecycle =
        track.hits >= params_.n_init ? TrackLifecycle::Confirmed : TrackLifecycle::Tentative;
    track.smoother = PointSmoother(params_.smoother);
    track.smoothed_position = track.smoother.smooth(track.position(), timestamp);
    tracks_.push_back(std::move(track));
  }

  std::vector<Track3D> out;
  for (const auto& track : tracks_) {
    if (track.lifecycle != TrackLifecycle::Confirmed) continue;
    Track3D t;
    t.id = track.track_id;
    t.position = track.position();
    t.smoothed = track.smoothed_position;
    t.velocity = track.kinematics.velocity();
    t.skeleton = track.last_skeleton3d;
    t.lifecycle = track.lifecycle;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace szloca
