#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "szloca/geometry.hpp"

namespace szloca {

/// Infinite ground plane. The normal must face upward.
struct GroundPlane {
  Vec3 anchor = Vec3::Zero();
  Vec3 normal = Vec3::UnitY();

  static GroundPlane horizontal(double height = 0.0) {
    return GroundPlane{Vec3(0.0, height, 0.0), Vec3::UnitY()};
  }

  /// Normalizes `normal` and checks the upward-facing invariant.
  static GroundPlane create(const Vec3& anchor, const Vec3& normal);

  void validate() const;
};

/// Regular grid of terrain heights, interpolated bilinearly.
/// Row r, column c sits at world (origin.x + c * cell_size, origin.z + r * cell_size).
class Heightfield {
 public:
  Heightfield(Vec2 origin_xz, double cell_size, int rows, int cols, std::vector<double> heights);
  static Heightfield from_rows(Vec2 origin_xz, double cell_size,
                               const std::vector<std::vector<double>>& rows);

  [[nodiscard]] const Vec2& origin() const noexcept { return origin_; }
  [[nodiscard]] double cell_size() const noexcept { return cell_size_; }
  [[nodiscard]] int rows() const noexcept { return rows_; }
  [[nodiscard]] int cols() const noexcept { return cols_; }
  [[nodiscard]] double height_at(int row, int col) const { return heights_[row * cols_ + col]; }
  [[nodiscard]] const std::vector<double>& heights() const noexcept { return heights_; }
  [[nodiscard]] double min_height() const noexcept { return min_height_; }
  [[nodiscard]] double max_height() const noexcept { return max_height_; }

  [[nodiscard]] double x_extent() const noexcept { return (cols_ - 1) * cell_size_; }
  [[nodiscard]] double z_extent() const noexcept { return (rows_ - 1) * cell_size_; }
  [[nodiscard]] bool contains(double x, double z) const;

 private:
  Vec2 origin_;
  double cell_size_;
  int rows_;
  int cols_;
  std::vector<double> heights_;
  double min_height_ = 0.0;
  double max_height_ = 0.0;
};

using GroundModel = std::variant<GroundPlane, Heightfield>;

/// Ray parameter of the crossing with an arbitrary plane, with no facing
/// requirement. nullopt for grazing rays or crossings at t <= 1e-9.
std::optional<double> ray_plane_parameter(const Ray& ray, const Vec3& point, const Vec3& normal);

std::optional<Vec3> intersect_plane(const Ray& ray, const GroundPlane& plane);

/// Bilinear height at (x, z); nullopt outside the grid footprint.
std::optional<double> sample_height(const Heightfield& hf, double x, double z);

/// First downward crossing of the ray with the bilinear surface.
/// `elevation` lifts the whole surface by a constant.
std::optional<Vec3> intersect_heightfield(const Ray& ray, const Heightfield& hf,
                                          double elevation = 0.0);

/// Dispatches on the ground kind. With a nonzero elevation the ground is
/// first offset along its normal by that amount.
std::optional<Vec3> intersect_ground(const Ray& ray, const GroundModel& ground,
                                     double elevation = 0.0);

/// Moves a point along the ground normal onto the surface. For heightfields
/// this is a vertical drop; nullopt outside the footprint.
std::optional<Vec3> project_onto_ground(const Vec3& point, const GroundModel& ground);

/// Upward normal at the point (planes: constant; heightfields: world up).
Vec3 ground_normal(const GroundModel& ground);

}  // namespace szloca
