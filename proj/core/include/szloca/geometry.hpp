#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace szloca {

// World frame: right-handed, +Y up, ground defaults to y = 0.
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Vec3 world_up() { return Vec3::UnitY(); }

/// Drops the world-up component.
inline Vec3 horizontal(const Vec3& v) { return {v.x(), 0.0, v.z()}; }

inline double planar_distance(const Vec3& a, const Vec3& b) {
  return Vec2(a.x() - b.x(), a.z() - b.z()).norm();
}

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = -Vec3::UnitZ();  // unit length

  [[nodiscard]] Vec3 at(double t) const { return origin + t * direction; }
};

}  // namespace szloca
