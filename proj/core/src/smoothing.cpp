#include "szloca/smoothing.hpp"

#include <cmath>
#include <numbers>

#include "szloca/error.hpp"

namespace szloca {
namespace {

double smoothing_factor(double cutoff_hz, double interval_s) {
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  return 1.0 / (1.0 + tau / interval_s);
}

}  // namespace

void SmootherConfig::validate() const {
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "ema_alpha must be in (0, 1]");
  }
  if (!(one_euro.min_cutoff_hz > 0.0) || !(one_euro.d_cutoff_hz > 0.0) ||
      !(one_euro.beta >= 0.0) || !std::isfinite(one_euro.min_cutoff_hz) ||
      !std::isfinite(one_euro.d_cutoff_hz) || !std::isfinite(one_euro.beta)) {
    throw Error(ErrorCode::InvalidConfig,
                "one-euro cutoffs must be positive and beta non-negative");
  }
}

double OneEuroFilter::filter(double value, double timestamp) {
  if (!state_) {
    state_ = State{value, 0.0, value, timestamp};
    return value;
  }
  State& s = *state_;
  const double interval = timestamp - s.last_time;
  if (interval < 0.0) {
    throw Error(ErrorCode::FrameOrder, "one-euro filter received a decreasing timestamp");
  }
  if (interval == 0.0) return s.value;

  const double raw_rate = (value - s.last_raw) / interval;
  s.derivative += smoothing_factor(params_.d_cutoff_hz, interval) * (raw_rate - s.derivative);
  const double cutoff = params_.min_cutoff_hz + params_.beta * std::abs(s.derivative);
  s.value += smoothing_factor(cutoff, interval) * (value - s.value);
  s.last_raw = value;
  s.last_time = timestamp;
  return s.value;
}

PointSmoother::PointSmoother(SmootherConfig config)
    : config_(config),
      axes_{OneEuroFilter(config.one_euro), OneEuroFilter(config.one_euro),
            OneEuroFilter(config.one_euro)} {}

Vec3 PointSmoother::smooth(const Vec3& sample, double timestamp) {
  switch (config_.kind) {
    case SmootherKind::None:
      return sample;
    case SmootherKind::Ema:
      if (last_time_ && timestamp < *last_time_) {
        throw Error(ErrorCode::FrameOrder, "smoother received a decreasing timestamp");
      }
      last_time_ = timestamp;
      ema_ = ema_ ? Vec3(config_.ema_alpha * sample + (1.0 - config_.ema_alpha) * *ema_) : sample;
      return *ema_;
    case SmootherKind::OneEuro:
      return {axes_[0].filter(sample.x(), timestamp), axes_[1].filter(sample.y(), timestamp),
              axes_[2].filter(sample.z(), timestamp)};
  }
  return sample;
}

}  // namespace szloca
