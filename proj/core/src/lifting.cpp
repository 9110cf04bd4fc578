#include "szloca/lifting.hpp"

namespace szloca {
namespace {

constexpr double kDegenerateHorizontal = 1e-9;

}  // namespace

std::optional<Vec3> lift_anchor(const AnchorResult& anchor, const CameraRig& rig,
                                const GroundModel& ground, const AnchorConfig& cfg) {
  const Ray ray = screen_to_ray(rig, anchor.pixel).ray;
  if (!anchor.needs_torso_correction || cfg.torso_height_m == 0.0) {
    return intersect_ground(ray, ground);
  }
  const auto raised = intersect_ground(ray, ground, cfg.torso_height_m);
  if (!raised) return std::nullopt;
  return project_onto_ground(*raised, ground);
}

Billboard billboard_for(const Vec3& ground_point, const CameraRig& rig) {
  const auto& pose = rig.pose();
  Vec3 n = rig.projection() == Projection::Perspective ? horizontal(pose.position - ground_point)
                                                       : horizontal(-pose.forward());
  // Camera straight overhead: fall back to the view direction, then to the image up axis.
  if (n.norm() < kDegenerateHorizontal) n = horizontal(-pose.forward());
  if (n.norm() < kDegenerateHorizontal) n = horizontal(-pose.up());
  return Billboard{ground_point, n.normalized()};
}

std::vector<PlacedJoint> place_skeleton(const Detection2D& det, const Vec3& ground_point,
                                        const CameraRig& rig) {
  const Billboard board = billboard_for(ground_point, rig);
  std::vector<PlacedJoint> joints;
  joints.reserve(det.keypoints.size());
  for (const auto& kp : det.keypoints) {
    if (!kp.present) continue;
    const Ray ray = screen_to_ray(rig, kp.pixel).ray;
    const auto t = ray_plane_parameter(ray, board.point, board.normal);
    PlacedJoint joint;
    joint.name = kp.name;
    if (t) {
      joint.position = ray.at(*t);
    } else {
      joint.present = false;
    }
    joints.push_back(std::move(joint));
  }
  return joints;
}

}  // namespace szloca
