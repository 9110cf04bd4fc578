#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "szloca/anchoring.hpp"
#include "szloca/camera_model.hpp"
#include "szloca/ground_surface.hpp"
#include "szloca/tracking.hpp"

namespace szloca {

struct NamedPoint {
  std::string name;
  Vec3 position = Vec3::Zero();
};

/// Canonical standing stick figure scaled to the agent height. Lateral joints
/// are spread along a horizontal axis perpendicular to the camera's view.
struct AgentTemplate {
  static constexpr double kHipFraction = 0.53;
  static constexpr double kShoulderFraction = 0.82;
  static constexpr double kNoseFraction = 0.93;
  static constexpr double kHalfWidthFraction = 0.10;

  static std::vector<NamedPoint> joints(const Vec3& footprint, double height_m,
                                        const Vec3& lateral_axis);

  /// Horizontal axis orthogonal to the camera's forward axis.
  static Vec3 lateral_axis_for(const CameraRig& rig);
};

struct AgentSpec {
  double height_m = 1.7;
  double speed_mps = 1.0;
  std::vector<Vec2> waypoints_xz;  // a single waypoint means standing still
};

struct NoiseModel {
  double pixel_noise_std = 2.0;
  double joint_dropout_prob = 0.05;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

CameraRig default_scene_rig();

struct SimScene {
  Vec2 area_size = {20.0, 20.0};  // (width along x, depth along z), meters
  Vec2 area_center = {0.0, -15.0};
  int agent_count = 10;
  Interval height_range{1.5, 1.9};
  Interval speed_range{0.5, 1.5};
  CameraRig rig = default_scene_rig();
  GroundModel ground = GroundPlane::horizontal();
  double frame_rate_hz = 25.0;
  double duration_s = 10.0;
  NoiseModel noise;
  std::uint64_t seed = 1;
  /// When non-empty these replace the randomly sampled agents.
  std::vector<AgentSpec> agents;

  void validate() const;
  [[nodiscard]] std::int64_t frame_count() const;
};

struct TruthAgent {
  int id = 0;
  double height_m = 0.0;
  Vec3 footprint = Vec3::Zero();
  std::vector<NamedPoint> joints;
  bool in_view = false;  // footprint projects inside the image
};

struct TruthFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<TruthAgent> agents;
};

/// Agents actually simulated: the explicit list or a seeded random draw.
std::vector<AgentSpec> resolve_agents(const SimScene& scene);

/// Position along the waypoint polyline after walking for `time_s`.
Vec2 position_along(const AgentSpec& agent, double time_s);

std::vector<TruthFrame> generate_truth(const SimScene& scene);

struct SyntheticDetection {
  int agent_id = 0;
  Detection2D detection;
};

/// Renders one truth frame into noisy pixel detections. Joints behind the
/// camera or outside the image are not observed; agents with no observable
/// joint are omitted. The noise stream depends only on (seed, frame index).
std::vector<SyntheticDetection> synthesize_detections(const TruthFrame& truth,
                                                      const CameraRig& rig,
                                                      const NoiseModel& noise, std::uint64_t seed);

DetectionFrame to_detection_frame(const TruthFrame& truth,
                                  const std::vector<SyntheticDetection>& detections);

/// sigma * d / (f * sin(theta)): planar displacement of a ground point caused by
/// sigma pixels of image-vertical error, to first order (d = range from the
/// camera, theta = depression angle of the ray).
double first_order_lift_error(const CameraRig& rig, const Vec3& ground_point,
                              const Vec3& ground_normal, double pixel_std);

// --- Scoring ---

struct DistanceBucket {
  double min_m = 0.0;
  double max_m = 0.0;
  std::size_t count = 0;
  double mean_error_m = 0.0;
};

struct Metrics {
  double mean_error_m = 0.0;
  double median_error_m = 0.0;
  double max_error_m = 0.0;
  std::size_t matched = 0;
  std::size_t truth_instances = 0;  // in-view truth agent-frames
  std::size_t missed = 0;
  double miss_rate = 0.0;
  std::size_t identity_switches = 0;
  std::size_t unmatched_outputs = 0;
  std::size_t false_tracks = 0;  // track ids never matched to any agent
  std::vector<DistanceBucket> distance_buckets;
};

struct EvaluationOptions {
  double matching_radius_m = 1.0;
  bool use_smoothed = false;
  double bucket_width_m = 5.0;
  /// Distances for the error buckets are measured from here (usually the camera).
  std::optional<Vec3> reference_point;
};

/// Greedy per-frame nearest matching within the radius, then aggregation.
Metrics evaluate(std::span<const TruthFrame> truth, std::span<const TrackFrame> outputs,
                 const EvaluationOptions& options = {});

}  // namespace szloca
