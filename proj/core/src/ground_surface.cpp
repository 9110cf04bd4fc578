#include "szloca/ground_surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "szloca/error.hpp"

namespace szloca {
namespace {

constexpr double kMinHitDistance = 1e-9;
constexpr double kGrazingDot = 1e-12;
constexpr double kUnitTol = 1e-9;
constexpr double kFootprintSlack = 1e-9;
constexpr double kSubStepsPerCell = 4.0;
constexpr double kBisectionTol = 1e-4;

// Bilinear interpolation, assumes (x, z) already inside the footprint.
double bilinear(const Heightfield& hf, double x, double z) {
  const double fx = (x - hf.origin().x()) / hf.cell_size();
  const double fz = (z - hf.origin().y()) / hf.cell_size();
  const int c = std::clamp(static_cast<int>(std::floor(fx)), 0, hf.cols() - 2);
  const int r = std::clamp(static_cast<int>(std::floor(fz)), 0, hf.rows() - 2);
  const double tx = std::clamp(fx - c, 0.0, 1.0);
  const double tz = std::clamp(fz - r, 0.0, 1.0);
  const double h00 = hf.height_at(r, c);
  const double h01 = hf.height_at(r, c + 1);
  const double h10 = hf.height_at(r + 1, c);
  const double h11 = hf.height_at(r + 1, c + 1);
  return (1.0 - tz) * ((1.0 - tx) * h00 + tx * h01) + tz * ((1.0 - tx) * h10 + tx * h11);
}

// Clips [t0, t1] to the slab lo <= origin + t * dir <= hi.
bool clip_slab(double origin, double dir, double lo, double hi, double& t0, double& t1) {
  if (std::abs(dir) < 1e-15) {
    return origin >= lo - kFootprintSlack && origin <= hi + kFootprintSlack;
  }
  double ta = (lo - origin) / dir;
  double tb = (hi - origin) / dir;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return t0 <= t1;
}

}  // namespace

GroundPlane GroundPlane::create(const Vec3& anchor, const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n) || !anchor.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "ground plane needs a finite anchor and nonzero normal");
  }
  GroundPlane plane{anchor, normal / n};
  plane.validate();
  return plane;
}

void GroundPlane::validate() const {
  if (!anchor.allFinite() || std::abs(normal.norm() - 1.0) > kUnitTol) {
    throw Error(ErrorCode::InvalidConfig, "ground plane normal must be unit length");
  }
  if (normal.dot(world_up()) <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "ground plane normal must face upward");
  }
}

Heightfield::Heightfield(Vec2 origin_xz, double cell_size, int rows, int cols,
                         std::vector<double> heights)
    : origin_(std::move(origin_xz)),
      cell_size_(cell_size),
      rows_(rows),
      cols_(cols),
      heights_(std::move(heights)) {
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_) || !origin_.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "heightfield cell_size must be positive");
  }
  if (rows_ < 2 || cols_ < 2) {
    throw Error(ErrorCode::InvalidConfig, "heightfield needs at least 2x2 samples");
  }
  if (heights_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
    throw Error(ErrorCode::InvalidConfig, "heightfield grid is not rectangular");
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) throw Error(ErrorCode::InvalidConfig, "heightfield heights must be finite");
  }
  const auto [lo, hi] = std::minmax_element(heights_.begin(), heights_.end());
  min_height_ = *lo;
  max_height_ = *hi;
}

Heightfield Heightfield::from_rows(Vec2 origin_xz, double cell_size,
                                   const std::vector<std::vector<double>>& rows) {
  const int cols = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  std::vector<double> flat;
  flat.reserve(rows.size() * static_cast<std::size_t>(cols));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != cols) {
      throw Error(ErrorCode::InvalidConfig, "heightfield grid is not rectangular");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Heightfield(std::move(origin_xz), cell_size, static_cast<int>(rows.size()), cols,
                     std::move(flat));
}

bool Heightfield::contains(double x, double z) const {
  const double dx = x - origin_.x();
  const double dz = z - origin_.y();
  return dx >= -kFootprintSlack && dx <= x_extent() + kFootprintSlack && dz >= -kFootprintSlack &&
         dz <= z_extent() + kFootprintSlack;
}

std::optional<double> ray_plane_parameter(const Ray& ray, const Vec3& point, const Vec3& normal) {
  const double denom = ray.direction.dot(normal);
  if (std::abs(denom) <= kGrazingDot) {
    return std::nullopt;
  }
  const double t = (point - ray.origin).dot(normal) / denom;
  if (!(t > kMinHitDistance)) {
    return std::nullopt;
  }
  return t;
}

std::optional<Vec3> intersect_plane(const Ray& ray, const GroundPlane& plane) {
  const auto t = ray_plane_parameter(ray, plane.anchor, plane.normal);
  if (!t) return std::nullopt;
  return ray.at(*t);
}

std::optional<double> sample_height(const Heightfield& hf, double x, double z) {
  if (!hf.contains(x, z)) {
    return std::nullopt;
  }
  return bilinear(hf, x, z);
}

std::optional<Vec3> intersect_heightfield(const Ray& ray, const Heightfield& hf, double elevation) {
  const Vec3& o = ray.origin;
  const Vec3& d = ray.direction;
  const double horiz = std::hypot(d.x(), d.z());

  if (horiz < kGrazingDot) {
    const auto h = sample_height(hf, o.x(), o.z());
    if (!h || d.y() >= 0.0) return std::nullopt;
    const double t = (o.y() - (*h + elevation)) / -d.y();
    if (!(t > kMinHitDistance)) return std::nullopt;
    return Vec3(o.x(), *h + elevation, o.z());
  }

  double t0 = kMinHitDistance;
  double t1 = std::numeric_limits<double>::infinity();
  const double x0 = hf.origin().x();
  const double z0 = hf.origin().y();
  if (!clip_slab(o.x(), d.x(), x0, x0 + hf.x_extent(), t0, t1) ||
      !clip_slab(o.z(), d.z(), z0, z0 + hf.z_extent(), t0, t1)) {
    return std::nullopt;
  }

  // Restrict to the band of heights the surface can occupy.
  const double y_lo = hf.min_height() + elevation;
  const double y_hi = hf.max_height() + elevation;
  constexpr double kBandSlack = 1e-6;
  if (d.y() < 0.0) {
    t0 = std::max(t0, (o.y() - y_hi) / -d.y() - kBandSlack);
    t1 = std::min(t1, (o.y() - y_lo) / -d.y() + kBandSlack);
  } else if (d.y() > 0.0) {
    t1 = std::min(t1, (y_hi - o.y()) / d.y() + kBandSlack);
  } else if (o.y() > y_hi) {
    return std::nullopt;
  }
  t0 = std::max(t0, kMinHitDistance);
  if (!(t0 <= t1)) return std::nullopt;

  auto gap = [&](double t) {
    const Vec3 p = ray.at(t);
    return p.y() - (bilinear(hf, p.x(), p.z()) + elevation);
  };

  const double step = hf.cell_size() / kSubStepsPerCell / horiz;
  double prev_t = t0;
  double prev_gap = gap(t0);
  while (prev_t < t1) {
    const double t = std::min(prev_t + step, t1);
    const double g = gap(t);
    if (prev_gap > 0.0 && g <= 0.0) {
      double lo = prev_t;
      double hi = t;
      double g_lo = prev_gap;
      double g_hi = g;
      while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = gap(mid);
        if (g_mid > 0.0) {
          lo = mid;
          g_lo = g_mid;
        } else {
          hi = mid;
          g_hi = g_mid;
        }
      }
      // Final secant step inside the bracket.
      const double t_hit = g_lo == g_hi ? hi : lo + (hi - lo) * g_lo / (g_lo - g_hi);
      return ray.at(t_hit);
    }
    prev_t = t;
    prev_gap = g;
  }
  return std::nullopt;
}

std::optional<Vec3> intersect_ground(const Ray& ray, const GroundModel& ground, double elevation) {
  if (const auto* plane = std::get_if<GroundPlane>(&ground)) {
    if (elevation == 0.0) return intersect_plane(ray, *plane);
    return intersect_plane(ray, GroundPlane{plane->anchor + elevation * plane->normal, plane->normal});
  }
  return intersect_heightfield(ray, std::get<Heightfield>(ground), elevation);
}

std::optional<Vec3> project_onto_ground(const Vec3& point, const GroundModel& ground) {
  if (const auto* plane = std::get_if<GroundPlane>(&ground)) {
    return Vec3(point - (point - plane->anchor).dot(plane->normal) * plane->normal);
  }
  const auto h = sample_height(std::get<Heightfield>(ground), point.x(), point.z());
  if (!h) return std::nullopt;
  return Vec3(point.x(), *h, point.z());
}

Vec3 ground_normal(const GroundModel& ground) {
  if (const auto* plane = std::get_if<GroundPlane>(&ground)) return plane->normal;
  return world_up();
}

}  // namespace szloca
