#include "szloca/camera_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Geometry>

#include "szloca/error.hpp"

namespace szloca {
namespace {

constexpr double kBehindCameraEps = 1e-9;
constexpr double kOrthonormalTol = 1e-9;

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

Vec2 default_principal_point(int width, int height, std::optional<Vec2> principal_point) {
  return principal_point.value_or(Vec2(width / 2.0, height / 2.0));
}

}  // namespace

CameraIntrinsics CameraIntrinsics::perspective(int width, int height, double focal_px,
                                               std::optional<Vec2> principal_point) {
  CameraIntrinsics k;
  k.projection = Projection::Perspective;
  k.image_width = width;
  k.image_height = height;
  k.focal_px = focal_px;
  k.principal_point = default_principal_point(width, height, principal_point);
  k.validate();
  return k;
}

CameraIntrinsics CameraIntrinsics::orthographic(int width, int height, double meters_per_pixel,
                                                std::optional<Vec2> principal_point) {
  CameraIntrinsics k;
  k.projection = Projection::Orthographic;
  k.image_width = width;
  k.image_height = height;
  k.ortho_scale = meters_per_pixel;
  k.principal_point = default_principal_point(width, height, principal_point);
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::InvalidConfig, "image size must be positive");
  }
  if (projection == Projection::Perspective && !(focal_px > 0.0 && std::isfinite(focal_px))) {
    throw Error(ErrorCode::InvalidConfig, "perspective camera needs focal_px > 0");
  }
  if (projection == Projection::Orthographic &&
      !(ortho_scale > 0.0 && std::isfinite(ortho_scale))) {
    throw Error(ErrorCode::InvalidConfig, "orthographic camera needs ortho_scale > 0");
  }
  const double u0 = principal_point.x();
  const double v0 = principal_point.y();
  if (!(u0 >= 0.0 && u0 <= image_width && v0 >= 0.0 && v0 <= image_height)) {
    throw Error(ErrorCode::InvalidConfig, "principal point must lie inside the image");
  }
}

Mat3 rotation_from_euler(double yaw_deg, double pitch_deg, double roll_deg) {
  if (!std::isfinite(yaw_deg) || !std::isfinite(pitch_deg) || !std::isfinite(roll_deg)) {
    throw Error(ErrorCode::InvalidAngle, "euler angles must be finite");
  }
  const Eigen::AngleAxisd yaw(radians(yaw_deg), Vec3::UnitY());
  const Eigen::AngleAxisd pitch(radians(pitch_deg), Vec3::UnitX());
  const Eigen::AngleAxisd roll(radians(roll_deg), Vec3::UnitZ());
  return (yaw * pitch * roll).toRotationMatrix();
}

CameraPose CameraPose::from_euler(const Vec3& position, double yaw_deg, double pitch_deg,
                                  double roll_deg) {
  return CameraPose{position, rotation_from_euler(yaw_deg, pitch_deg, roll_deg)};
}

void CameraPose::validate() const {
  if (!position.allFinite() || !rotation.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "camera pose must be finite");
  }
  const double off = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (off >= kOrthonormalTol || std::abs(rotation.determinant() - 1.0) >= kOrthonormalTol) {
    throw Error(ErrorCode::InvalidConfig, "camera rotation is not a proper orthonormal matrix");
  }
}

CameraRig::CameraRig(CameraIntrinsics intrinsics, CameraPose pose, RigOptions options)
    : intrinsics_(std::move(intrinsics)), pose_(std::move(pose)) {
  intrinsics_.validate();
  pose_.validate();
  const double downward = pose_.forward().dot(world_up());
  if (!options.force && downward > -options.min_downward) {
    std::ostringstream msg;
    msg << "tilt check failed: camera forward axis has world-up component " << downward + 0.0
        << ", must be <= " << -options.min_downward
        << " (the camera has to look down at the ground; use force to override)";
    throw Error(ErrorCode::TiltCheck, msg.str());
  }
}

bool CameraRig::in_image(const Vec2& pixel) const {
  return pixel.x() >= 0.0 && pixel.x() <= intrinsics_.image_width && pixel.y() >= 0.0 &&
         pixel.y() <= intrinsics_.image_height;
}

PixelRay screen_to_ray(const CameraRig& rig, const Vec2& pixel) {
  const auto& k = rig.intrinsics();
  const auto& pose = rig.pose();
  const double du = pixel.x() - k.principal_point.x();
  const double dv = k.principal_point.y() - pixel.y();

  PixelRay out;
  out.outside_image = !rig.in_image(pixel);
  if (k.projection == Projection::Perspective) {
    const Vec3 cam_dir(du / k.focal_px, dv / k.focal_px, -1.0);
    out.ray.origin = pose.position;
    out.ray.direction = (pose.rotation * cam_dir).normalized();
  } else {
    const Vec3 offset(k.ortho_scale * du, k.ortho_scale * dv, 0.0);
    out.ray.origin = pose.position + pose.rotation * offset;
    out.ray.direction = pose.forward();
  }
  return out;
}

std::optional<ScreenPoint> world_to_screen(const CameraRig& rig, const Vec3& point) {
  const auto& k = rig.intrinsics();
  const auto& pose = rig.pose();
  const Vec3 cam = pose.rotation.transpose() * (point - pose.position);
  if (cam.z() >= -kBehindCameraEps) {
    return std::nullopt;
  }
  const double depth = -cam.z();
  ScreenPoint out;
  out.depth = depth;
  if (k.projection == Projection::Perspective) {
    out.pixel = {k.principal_point.x() + k.focal_px * cam.x() / depth,
                 k.principal_point.y() - k.focal_px * cam.y() / depth};
  } else {
    out.pixel = {k.principal_point.x() + cam.x() / k.ortho_scale,
                 k.principal_point.y() - cam.y() / k.ortho_scale};
  }
  return out;
}

}  // namespace szloca
