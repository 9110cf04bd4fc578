#pragma once

#include <Eigen/Core>

#include "szloca/geometry.hpp"

namespace szloca {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

/// Constant-velocity ground-plane state (x, z, vx, vz) with covariance.
struct KinematicState {
  Vec4 mean = Vec4::Zero();
  Mat4 covariance = Mat4::Identity();

  static KinematicState at_rest(const Vec2& position_xz, double position_std, double velocity_std);

  [[nodiscard]] Vec2 position() const { return mean.head<2>(); }
  [[nodiscard]] Vec2 velocity() const { return mean.tail<2>(); }
};

/// x += v * dt, with white-acceleration process noise of the given std (m/s^2).
KinematicState predict(const KinematicState& state, double dt, double accel_std);

/// Fuses a planar position measurement (Joseph form, symmetrized).
KinematicState update(const KinematicState& state, const Vec2& measured_xz, double measurement_std);

}  // namespace szloca
