#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "szloca/anchoring.hpp"
#include "szloca/camera_model.hpp"
#include "szloca/geometry.hpp"
#include "szloca/ground_surface.hpp"

namespace szloca {

struct PlacedJoint {
  std::string name;
  Vec3 position = Vec3::Zero();
  bool present = true;  // false when the joint's ray missed the billboard
};

struct LiftedDetection {
  Vec3 ground_point = Vec3::Zero();
  AnchorResult anchor;
  std::optional<std::vector<PlacedJoint>> skeleton3d;
  std::size_t source_index = 0;  // position of the detection within its frame
};

/// Casts the anchor's ray onto the ground. Torso anchors are intersected with
/// the ground raised by cfg.torso_height_m and then dropped back onto the true
/// ground along its normal. nullopt when the ray never reaches the ground.
std::optional<Vec3> lift_anchor(const AnchorResult& anchor, const CameraRig& rig,
                                const GroundModel& ground, const AnchorConfig& cfg);

/// Vertical plane through ground_point whose normal points horizontally back at
/// the camera. Joints are placed where their rays cross it, so joints of
/// distant people spread over proportionally larger world extents.
struct Billboard {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

Billboard billboard_for(const Vec3& ground_point, const CameraRig& rig);

/// One entry per present input joint, in input order.
std::vector<PlacedJoint> place_skeleton(const Detection2D& det, const Vec3& ground_point,
                                        const CameraRig& rig);

// --- Planar homography path (perspective rigs, planar ground only) ---

/// Orthonormal 2D frame embedded in a ground plane. Plane coordinates (a, b)
/// map to origin + a * axis_a + b * axis_b. For the y = 0 plane these are
/// world (x, z).
struct PlaneFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 axis_a = Vec3::UnitX();
  Vec3 axis_b = Vec3::UnitZ();
  Vec3 normal = Vec3::UnitY();

  static PlaneFrame from_plane(const GroundPlane& plane);

  [[nodiscard]] Vec2 to_plane(const Vec3& world) const;
  [[nodiscard]] Vec3 to_world(const Vec2& plane) const;
};

/// Pixel (u, v, 1) -> homogeneous plane coordinates, normalized so the
/// largest-magnitude entry is +1.
struct GroundHomography {
  Mat3 matrix = Mat3::Identity();
  PlaneFrame frame;

  static GroundHomography normalized(const Mat3& h, const PlaneFrame& frame);

  /// nullopt for pixels on the vanishing line (|w| < 1e-12).
  [[nodiscard]] std::optional<Vec2> map_to_plane(const Vec2& pixel) const;
};

/// Closed-form homography for a perspective rig. Throws
/// Error(DegenerateConfiguration) when the camera sits on the plane and
/// Error(InvalidArgument) for orthographic rigs.
GroundHomography homography_from_camera(const CameraRig& rig, const GroundPlane& plane);

struct CorrespondencePair {
  Vec2 pixel = Vec2::Zero();
  Vec2 plane = Vec2::Zero();
};

struct HomographyFit {
  GroundHomography homography;
  double rms_residual_m = 0.0;
  double max_residual_m = 0.0;
  /// sigma_max / sigma_second_smallest of the normalized design matrix.
  double condition = 0.0;
};

/// Normalized DLT over >= 4 correspondences. Throws Error(CalibrationFailed)
/// for too few pairs or a rank-deficient system.
HomographyFit fit_ground_homography(const std::vector<CorrespondencePair>& pairs,
                                    const PlaneFrame& frame = {});

std::optional<Vec3> lift_via_homography(const GroundHomography& h, const Vec2& pixel);

}  // namespace szloca
