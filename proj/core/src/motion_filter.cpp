#include "szloca/motion_filter.hpp"

#include <Eigen/Dense>

namespace szloca {

KinematicState KinematicState::at_rest(const Vec2& position_xz, double position_std,
                                       double velocity_std) {
  KinematicState s;
  s.mean << position_xz.x(), position_xz.y(), 0.0, 0.0;
  const double p = position_std * position_std;
  const double v = velocity_std * velocity_std;
  s.covariance = Vec4(p, p, v, v).asDiagonal();
  return s;
}

KinematicState predict(const KinematicState& state, double dt, double accel_std) {
  Mat4 f = Mat4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;

  const double q = accel_std * accel_std;
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  const double dt4 = dt3 * dt;
  Mat4 noise = Mat4::Zero();
  noise(0, 0) = noise(1, 1) = q * dt4 / 4.0;
  noise(0, 2) = noise(2, 0) = noise(1, 3) = noise(3, 1) = q * dt3 / 2.0;
  noise(2, 2) = noise(3, 3) = q * dt2;

  KinematicState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + noise;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

KinematicState update(const KinematicState& state, const Vec2& measured_xz,
                      double measurement_std) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * measurement_std * measurement_std;

  const Vec2 innovation = measured_xz - h * state.mean;
  const Eigen::Matrix2d s = h * state.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain = state.covariance * h.transpose() * s.inverse();

  KinematicState out;
  out.mean = state.mean + gain * innovation;
  const Mat4 i_kh = Mat4::Identity() - gain * h;
  out.covariance = i_kh * state.covariance * i_kh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace szloca
