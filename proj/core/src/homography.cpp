#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "szloca/error.hpp"
#include "szloca/lifting.hpp"

namespace szloca {
namespace {

constexpr double kAtInfinity = 1e-12;
constexpr double kRankTol = 1e-10;

// Similarity taking the points to centroid 0 and RMS distance sqrt(2).
Mat3 normalizing_transform(const std::vector<Vec2>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double sq = 0.0;
  for (const auto& p : pts) sq += (p - centroid).squaredNorm();
  const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
  const double s = rms > 0.0 ? std::sqrt(2.0) / rms : 1.0;
  Mat3 t;
  t << s, 0.0, -s * centroid.x(),  //
      0.0, s, -s * centroid.y(),   //
      0.0, 0.0, 1.0;
  return t;
}

Vec2 apply(const Mat3& t, const Vec2& p) { return (t * p.homogeneous()).hnormalized(); }

}  // namespace

PlaneFrame PlaneFrame::from_plane(const GroundPlane& plane) {
  PlaneFrame f;
  f.origin = plane.anchor;
  f.normal = plane.normal;
  Vec3 a = Vec3::UnitX() - Vec3::UnitX().dot(plane.normal) * plane.normal;
  if (a.norm() < 1e-9) a = Vec3::UnitZ() - Vec3::UnitZ().dot(plane.normal) * plane.normal;
  f.axis_a = a.normalized();
  f.axis_b = f.axis_a.cross(plane.normal);
  return f;
}

Vec2 PlaneFrame::to_plane(const Vec3& world) const {
  const Vec3 rel = world - origin;
  return {rel.dot(axis_a), rel.dot(axis_b)};
}

Vec3 PlaneFrame::to_world(const Vec2& plane) const {
  return origin + plane.x() * axis_a + plane.y() * axis_b;
}

GroundHomography GroundHomography::normalized(const Mat3& h, const PlaneFrame& frame) {
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  h.cwiseAbs().maxCoeff(&r, &c);
  return GroundHomography{h / h(r, c), frame};
}

std::optional<Vec2> GroundHomography::map_to_plane(const Vec2& pixel) const {
  const Vec3 q = matrix * pixel.homogeneous();
  if (std::abs(q.z()) < kAtInfinity) return std::nullopt;
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

GroundHomography homography_from_camera(const CameraRig& rig, const GroundPlane& plane) {
  if (rig.projection() != Projection::Perspective) {
    throw Error(ErrorCode::InvalidArgument, "ground homography requires a perspective rig");
  }
  const auto& k = rig.intrinsics();
  const PlaneFrame frame = PlaneFrame::from_plane(plane);
  const Vec3 c = rig.position() - plane.anchor;
  const double h = -c.dot(plane.normal);
  if (std::abs(h) < 1e-9) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "camera lies on the ground plane; no homography exists");
  }

  // Pixel -> camera-space ray direction.
  Mat3 back_project;
  back_project << 1.0 / k.focal_px, 0.0, -k.principal_point.x() / k.focal_px,  //
      0.0, -1.0 / k.focal_px, k.principal_point.y() / k.focal_px,              //
      0.0, 0.0, -1.0;

  // World ray direction d -> homogeneous plane coordinates of the ray/plane hit.
  Mat3 to_plane;
  to_plane.row(0) = c.dot(frame.axis_a) * plane.normal.transpose() + h * frame.axis_a.transpose();
  to_plane.row(1) = c.dot(frame.axis_b) * plane.normal.transpose() + h * frame.axis_b.transpose();
  to_plane.row(2) = plane.normal.transpose();

  return GroundHomography::normalized(to_plane * rig.pose().rotation * back_project, frame);
}

HomographyFit fit_ground_homography(const std::vector<CorrespondencePair>& pairs,
                                    const PlaneFrame& frame) {
  if (pairs.size() < 4) {
    std::ostringstream msg;
    msg << "calibration failed: need at least 4 correspondences, got " << pairs.size();
    throw Error(ErrorCode::CalibrationFailed, msg.str());
  }
  std::vector<Vec2> pixels;
  std::vector<Vec2> targets;
  pixels.reserve(pairs.size());
  targets.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.pixel.allFinite() || !p.plane.allFinite()) {
      throw Error(ErrorCode::CalibrationFailed, "calibration failed: non-finite correspondence");
    }
    pixels.push_back(p.pixel);
    targets.push_back(p.plane);
  }
  const Mat3 t_pix = normalizing_transform(pixels);
  const Mat3 t_plane = normalizing_transform(targets);

  // At least 9 rows so the SVD always reports nine singular values.
  const Eigen::Index rows = std::max<Eigen::Index>(9, 2 * static_cast<Eigen::Index>(pairs.size()));
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::RowVector3d p = apply(t_pix, pixels[i]).homogeneous().transpose();
    const Vec2 q = apply(t_plane, targets[i]);
    const auto r = static_cast<Eigen::Index>(2 * i);
    design.block<1, 3>(r, 0) = p;
    design.block<1, 3>(r, 6) = -q.x() * p;
    design.block<1, 3>(r + 1, 3) = p;
    design.block<1, 3>(r + 1, 6) = -q.y() * p;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double condition = sigma(7) > 0.0 ? sigma(0) / sigma(7) : INFINITY;
  if (!(sigma(7) > kRankTol * sigma(0))) {
    std::ostringstream msg;
    msg << "calibration failed: correspondences are degenerate (collinear points?); "
        << "condition number " << condition;
    throw Error(ErrorCode::CalibrationFailed, msg.str());
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 h_norm;
  h_norm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Mat3 h_full = t_plane.inverse() * h_norm * t_pix;
  if (h_full.determinant() == 0.0 || !h_full.allFinite()) {
    throw Error(ErrorCode::CalibrationFailed, "calibration failed: singular homography");
  }

  HomographyFit fit;
  fit.homography = GroundHomography::normalized(h_full, frame);
  fit.condition = condition;
  double sq = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto mapped = fit.homography.map_to_plane(pixels[i]);
    const double err = mapped ? (*mapped - targets[i]).norm() : INFINITY;
    sq += err * err;
    fit.max_residual_m = std::max(fit.max_residual_m, err);
  }
  fit.rms_residual_m = std::sqrt(sq / static_cast<double>(pairs.size()));
  return fit;
}

std::optional<Vec3> lift_via_homography(const GroundHomography& h, const Vec2& pixel) {
  const auto plane = h.map_to_plane(pixel);
  if (!plane) return std::nullopt;
  return h.frame.to_world(*plane);
}

}  // namespace szloca
