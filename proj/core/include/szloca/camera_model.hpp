#pragma once

#include <optional>

#include "szloca/geometry.hpp"

namespace szloca {

// Camera space: +X right, +Y up, looking down -Z.
// Screen space: origin top-left, +u right, +v down, pixels.

enum class Projection { Perspective, Orthographic };

struct CameraIntrinsics {
  Projection projection = Projection::Perspective;
  int image_width = 0;
  int image_height = 0;
  double focal_px = 0.0;     // perspective only
  double ortho_scale = 0.0;  // meters per pixel, orthographic only
  Vec2 principal_point = Vec2::Zero();

  /// Principal point defaults to the image center.
  static CameraIntrinsics perspective(int width, int height, double focal_px,
                                      std::optional<Vec2> principal_point = std::nullopt);
  static CameraIntrinsics orthographic(int width, int height, double meters_per_pixel,
                                       std::optional<Vec2> principal_point = std::nullopt);

  /// Throws Error(InvalidConfig) when a field is out of range.
  void validate() const;
};

/// Composes R = R_yaw(world Y) * R_pitch(camera X) * R_roll(camera Z).
/// Angles are in degrees. Throws Error(InvalidAngle) on non-finite input.
Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg);

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();  // camera -> world

  static CameraPose from_euler(const Vec3& position, double yaw_deg, double pitch_deg,
                               double roll_deg);

  [[nodiscard]] Vec3 forward() const { return rotation * -Vec3::UnitZ(); }
  [[nodiscard]] Vec3 right() const { return rotation * Vec3::UnitX(); }
  [[nodiscard]] Vec3 up() const { return rotation * Vec3::UnitY(); }

  void validate() const;
};

struct RigOptions {
  /// Forward axis world-up component must be at or below -min_downward.
  double min_downward = 0.05;
  /// Skip the downward-tilt check.
  bool force = false;
};

/// A validated, immutable camera. Construction rejects invalid intrinsics,
/// non-orthonormal rotations, and cameras that do not look below the horizon.
class CameraRig {
 public:
  CameraRig(CameraIntrinsics intrinsics, CameraPose pose, RigOptions options = {});

  [[nodiscard]] const CameraIntrinsics& intrinsics() const noexcept { return intrinsics_; }
  [[nodiscard]] const CameraPose& pose() const noexcept { return pose_; }
  [[nodiscard]] Projection projection() const noexcept { return intrinsics_.projection; }
  [[nodiscard]] const Vec3& position() const noexcept { return pose_.position; }

  [[nodiscard]] bool in_image(const Vec2& pixel) const;

 private:
  CameraIntrinsics intrinsics_;
  CameraPose pose_;
};

struct PixelRay {
  Ray ray;
  bool outside_image = false;
};

/// Ray through a pixel. Pixels outside the image are still cast and flagged.
PixelRay screen_to_ray(const CameraRig& rig, const Vec2& pixel);

struct ScreenPoint {
  Vec2 pixel = Vec2::Zero();
  double depth = 0.0;  // along the forward axis, meters
};

/// Projects a world point; nullopt when the point is at or behind the camera plane.
std::optional<ScreenPoint> world_to_screen(const CameraRig& rig, const Vec3& point);

}  // namespace szloca
