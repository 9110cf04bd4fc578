#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

#include "szloca/anchoring.hpp"
#include "szloca/simulation.hpp"
#include "szloca/tracking.hpp"

namespace szloca {

// Newline-delimited JSON records.
//
// Detections: {"frame":0,"t":0.0,"detections":[{"bbox":[u,v,w,h],"kp":{"nose":[u,v,c]},"conf":1.0}]}
// Tracks:     {"frame":0,"t":0.000000,"tracks":[{"id":1,"pos":[x,y,z],"smoothed":[x,y,z],
//              "vel":[vx,vz],"skeleton":{"nose":[x,y,z]},"state":"confirmed"}]}
//
// Track records use fixed six-decimal numbers and a fixed key order so output
// is byte-stable.

/// Parses one detection record. Listed keypoints are present; `bbox` is optional.
DetectionFrame parse_detection_record(std::string_view line);

/// Shortest round-trip number formatting; absent keypoints are omitted.
std::string serialize_detection_record(const DetectionFrame& frame);

/// Pulls detection frames from a line stream one at a time. Blank lines are
/// skipped. Errors carry the 1-based line number.
class DetectionStreamReader {
 public:
  explicit DetectionStreamReader(std::istream* in = nullptr) : in_(in) {}

  /// nullopt at end of input. Throws Error(Parse) on a malformed line and
  /// Error(FrameOrder) when frame or t fails to increase.
  std::optional<DetectionFrame> next();

  /// Same checks for a record that arrived by other means (e.g. a datagram).
  /// Each call counts as one line.
  DetectionFrame accept(std::string_view line);

  [[nodiscard]] std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream* in_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_frame_;
  std::optional<double> last_t_;
};

/// Throws Error(Serialization) if any value is non-finite.
std::string serialize_track_record(const TrackFrame& frame);

TrackFrame parse_track_record(std::string_view line);

std::string serialize_truth_record(const TruthFrame& frame);

/// "%.6f" without a negative sign on zero.
std::string format_fixed6(double value);

}  // namespace szloca
