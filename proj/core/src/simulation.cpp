#include "szloca/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "szloca/error.hpp"

namespace szloca {
namespace {

constexpr double kBboxPadding = 5.0;

double ground_height_at(const GroundModel& ground, double x, double z) {
  if (const auto* plane = std::get_if<GroundPlane>(&ground)) {
    const Vec3& a = plane->anchor;
    const Vec3& n = plane->normal;
    return a.y() - ((x - a.x()) * n.x() + (z - a.z()) * n.z()) / n.y();
  }
  const auto& hf = std::get<Heightfield>(ground);
  const double cx = std::clamp(x, hf.origin().x(), hf.origin().x() + hf.x_extent());
  const double cz = std::clamp(z, hf.origin().y(), hf.origin().y() + hf.z_extent());
  return *sample_height(hf, cx, cz);
}

std::mt19937_64 frame_rng(std::uint64_t seed, std::int64_t frame_index) {
  const auto f = static_cast<std::uint64_t>(frame_index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(f >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::vector<NamedPoint> AgentTemplate::joints(const Vec3& footprint, double height_m,
                                              const Vec3& lateral_axis) {
  const Vec3 up = world_up() * height_m;
  const Vec3 side = lateral_axis * (kHalfWidthFraction * height_m);
  return {
      {"nose", footprint + kNoseFraction * up},
      {"left_shoulder", footprint + kShoulderFraction * up + side},
      {"right_shoulder", footprint + kShoulderFraction * up - side},
      {"left_hip", footprint + kHipFraction * up + side},
      {"right_hip", footprint + kHipFraction * up - side},
      {"left_ankle", footprint + side},
      {"right_ankle", footprint - side},
  };
}

Vec3 AgentTemplate::lateral_axis_for(const CameraRig& rig) {
  Vec3 axis = rig.pose().forward().cross(world_up());
  if (axis.norm() < 1e-9) axis = horizontal(rig.pose().right());
  return axis.normalized();
}

CameraRig default_scene_rig() {
  return CameraRig(CameraIntrinsics::perspective(1920, 1080, 800.0),
                   CameraPose::from_euler(Vec3(0.0, 12.0, 0.0), 0.0, -40.0, 0.0));
}

void SimScene::validate() const {
  if (!(area_size.x() > 0.0 && area_size.y() > 0.0) || !area_center.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "scene area must be positive");
  }
  if (agent_count < 0) throw Error(ErrorCode::InvalidConfig, "agent_count must be >= 0");
  if (!(height_range.lo > 0.0 && height_range.lo <= height_range.hi)) {
    throw Error(ErrorCode::InvalidConfig, "height range must be ordered and positive");
  }
  if (!(speed_range.lo >= 0.0 && speed_range.lo <= speed_range.hi)) {
    throw Error(ErrorCode::InvalidConfig, "speed range must be ordered and non-negative");
  }
  if (!(frame_rate_hz > 0.0) || !(duration_s >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "frame rate must be positive and duration non-negative");
  }
  if (!(noise.pixel_noise_std >= 0.0) ||
      !(noise.joint_dropout_prob >= 0.0 && noise.joint_dropout_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "noise std must be >= 0 and dropout in [0, 1]");
  }
  for (const auto& a : agents) {
    if (a.waypoints_xz.empty() || !(a.height_m > 0.0) || !(a.speed_mps >= 0.0)) {
      throw Error(ErrorCode::InvalidConfig,
                  "explicit agents need waypoints, a positive height, and a speed >= 0");
    }
  }
}

std::int64_t SimScene::frame_count() const {
  return static_cast<std::int64_t>(std::llround(duration_s * frame_rate_hz));
}

std::vector<AgentSpec> resolve_agents(const SimScene& scene) {
  if (!scene.agents.empty()) return scene.agents;

  std::seed_seq seq{static_cast<std::uint32_t>(scene.seed),
                    static_cast<std::uint32_t>(scene.seed >> 32), 0x5ce9eu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> height(scene.height_range.lo, scene.height_range.hi);
  std::uniform_real_distribution<double> speed(scene.speed_range.lo, scene.speed_range.hi);
  const Vec2 half = scene.area_size / 2.0;
  std::uniform_real_distribution<double> ux(scene.area_center.x() - half.x(),
                                            scene.area_center.x() + half.x());
  std::uniform_real_distribution<double> uz(scene.area_center.y() - half.y(),
                                            scene.area_center.y() + half.y());

  std::vector<AgentSpec> agents;
  agents.reserve(static_cast<std::size_t>(scene.agent_count));
  for (int i = 0; i < scene.agent_count; ++i) {
    AgentSpec a;
    a.height_m = height(rng);
    a.speed_mps = speed(rng);
    a.waypoints_xz.emplace_back(ux(rng), uz(rng));
    const double needed = a.speed_mps * scene.duration_s;
    double length = 0.0;
    while (length <= needed) {
      const Vec2 next(ux(rng), uz(rng));
      length += (next - a.waypoints_xz.back()).norm();
      a.waypoints_xz.push_back(next);
    }
    agents.push_back(std::move(a));
  }
  return agents;
}

Vec2 position_along(const AgentSpec& agent, double time_s) {
  double remaining = agent.speed_mps * time_s;
  const auto& wp = agent.waypoints_xz;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Vec2 seg = wp[i + 1] - wp[i];
    const double len = seg.norm();
    if (remaining <= len) {
      return len > 0.0 ? Vec2(wp[i] + seg * (remaining / len)) : wp[i];
    }
    remaining -= len;
  }
  return wp.back();
}

std::vector<TruthFrame> generate_truth(const SimScene& scene) {
  scene.validate();
  const auto agents = resolve_agents(scene);
  const Vec3 lateral = AgentTemplate::lateral_axis_for(scene.rig);
  const std::int64_t frames = scene.frame_count();

  std::vector<TruthFrame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (std::int64_t k = 0; k < frames; ++k) {
    TruthFrame frame;
    frame.frame_index = k;
    frame.timestamp = static_cast<double>(k) / scene.frame_rate_hz;
    frame.agents.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const Vec2 xz = position_along(agents[i], frame.timestamp);
      TruthAgent agent;
      agent.id = static_cast<int>(i);
      agent.height_m = agents[i].height_m;
      agent.footprint = Vec3(xz.x(), ground_height_at(scene.ground, xz.x(), xz.y()), xz.y());
      agent.joints = AgentTemplate::joints(agent.footprint, agent.height_m, lateral);
      const auto projected = world_to_screen(scene.rig, agent.footprint);
      agent.in_view = projected && scene.rig.in_image(projected->pixel);
      frame.agents.push_back(std::move(agent));
    }
    out.push_back(std::move(frame));
  }
  return out;
}

std::vector<SyntheticDetection> synthesize_detections(const TruthFrame& truth,
                                                      const CameraRig& rig,
                                                      const NoiseModel& noise,
                                                      std::uint64_t seed) {
  auto rng = frame_rng(seed, truth.frame_index);
  std::normal_distribution<double> pixel_noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<SyntheticDetection> out;
  out.reserve(truth.agents.size());
  for (const auto& agent : truth.agents) {
    SyntheticDetection synth;
    synth.agent_id = agent.id;
    bool observable = false;
    Vec2 lo(INFINITY, INFINITY);
    Vec2 hi(-INFINITY, -INFINITY);
    for (const auto& joint : agent.joints) {
      const auto projected = world_to_screen(rig, joint.position);
      if (!projected || !rig.in_image(projected->pixel)) continue;
      observable = true;
      // Draw both noise and dropout for every visible joint so the stream
      // consumption does not depend on the parameter values.
      const double nu = pixel_noise(rng);
      const double nv = pixel_noise(rng);
      const double drop = unit(rng);
      if (drop < noise.joint_dropout_prob) continue;
      Keypoint kp;
      kp.name = joint.name;
      kp.pixel = projected->pixel + noise.pixel_noise_std * Vec2(nu, nv);
      kp.confidence = 1.0;
      lo = lo.cwiseMin(kp.pixel);
      hi = hi.cwiseMax(kp.pixel);
      synth.detection.keypoints.push_back(std::move(kp));
    }
    if (!observable) continue;
    if (!synth.detection.keypoints.empty()) {
      synth.detection.bbox = BoundingBox{lo.x() - kBboxPadding, lo.y() - kBboxPadding,
                                         hi.x() - lo.x() + 2.0 * kBboxPadding,
                                         hi.y() - lo.y() + 2.0 * kBboxPadding};
    }
    synth.detection.confidence = synth.detection.keypoints.empty() ? 0.0 : 1.0;
    out.push_back(std::move(synth));
  }
  return out;
}

DetectionFrame to_detection_frame(const TruthFrame& truth,
                                  const std::vector<SyntheticDetection>& detections) {
  DetectionFrame frame;
  frame.frame_index = truth.frame_index;
  frame.timestamp = truth.timestamp;
  frame.detections.reserve(detections.size());
  for (const auto& d : detections) frame.detections.push_back(d.detection);
  return frame;
}

double first_order_lift_error(const CameraRig& rig, const Vec3& ground_point,
                              const Vec3& ground_normal, double pixel_std) {
  const Vec3 to_camera = rig.position() - ground_point;
  const double range = to_camera.norm();
  const double sin_depression = to_camera.dot(ground_normal) / range;
  if (rig.projection() == Projection::Orthographic) {
    return pixel_std * rig.intrinsics().ortho_scale / -rig.pose().forward().dot(ground_normal);
  }
  return pixel_std * range / (rig.intrinsics().focal_px * sin_depression);
}

}  // namespace szloca
