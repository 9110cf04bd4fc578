#pragma once

#include <array>
#include <optional>

#include "szloca/geometry.hpp"

namespace szloca {

enum class SmootherKind { None, Ema, OneEuro };

struct OneEuroParams {
  double min_cutoff_hz = 1.0;
  double beta = 0.05;
  double d_cutoff_hz = 1.0;
};

struct SmootherConfig {
  SmootherKind kind = SmootherKind::OneEuro;
  double ema_alpha = 0.5;
  OneEuroParams one_euro;

  void validate() const;
};

/// Scalar one-euro filter: a first-order low-pass whose cutoff rises with the
/// (itself low-passed) speed of the signal.
class OneEuroFilter {
 public:
  explicit OneEuroFilter(OneEuroParams params = {}) : params_(params) {}

  /// Timestamps must be non-decreasing; a repeated timestamp returns the
  /// previous output unchanged.
  double filter(double value, double timestamp);

  void reset() { state_.reset(); }

 private:
  struct State {
    double value;
    double derivative;
    double last_raw;
    double last_time;
  };

  OneEuroParams params_;
  std::optional<State> state_;
};

/// Per-axis smoothing of world points according to a SmootherConfig.
class PointSmoother {
 public:
  explicit PointSmoother(SmootherConfig config = {});

  Vec3 smooth(const Vec3& sample, double timestamp);

 private:
  SmootherConfig config_;
  std::optional<Vec3> ema_;
  std::optional<double> last_time_;
  std::array<OneEuroFilter, 3> axes_;
};

}  // namespace szloca
