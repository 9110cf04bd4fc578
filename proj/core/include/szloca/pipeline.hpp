#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <stop_token>
#include <vector>

#include "szloca/config.hpp"
#include "szloca/records.hpp"
#include "szloca/tracking.hpp"
#include "szloca/udp.hpp"

namespace szloca {

struct PipelineStats {
  std::size_t frames = 0;
  std::size_t detections = 0;
  std::size_t anchor_misses = 0;  // no usable anchor strategy
  std::size_t lift_misses = 0;    // anchor misses plus rays that never met the ground
  std::size_t outside_image_anchors = 0;
  std::size_t active_tracks = 0;  // tracker state size after the last frame
  std::size_t peak_tracks = 0;
  std::size_t records_written = 0;
  std::size_t osc_enqueued = 0;
  std::size_t osc_sent = 0;
  std::size_t osc_dropped = 0;
};

/// anchor -> lift -> place skeleton -> track, one frame at a time. Holds only
/// the tracker state between frames.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  /// Errors are rethrown with the frame index prepended.
  TrackFrame process(const DetectionFrame& frame);

  /// Anchoring and lifting only; updates the detection counters.
  std::vector<LiftedDetection> lift_frame(const DetectionFrame& frame);

  [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }
  [[nodiscard]] const PipelineStats& stats() const noexcept { return stats_; }
  [[nodiscard]] const Tracker& tracker() const noexcept { return tracker_; }

 private:
  std::optional<Vec3> lift(const AnchorResult& anchor) const;

  PipelineConfig config_;
  std::optional<GroundHomography> homography_;
  Tracker tracker_;
  PipelineStats stats_;
};

/// Where finished frames go. Either member may be null.
struct FrameSinks {
  std::ostream* records = nullptr;
  OscEmitter* emitter = nullptr;
  EmitPosition emit_position = EmitPosition::Smoothed;
};

/// Writes the record line and enqueues one OSC message per track.
void deliver(const TrackFrame& frame, FrameSinks& sinks, PipelineStats& stats);

/// Reads detection records until end of input. One output record per input frame.
PipelineStats run_file_pipeline(Pipeline& pipeline, std::istream& in, FrameSinks sinks);

struct StreamOptions {
  /// Stop once this many frames have been processed.
  std::optional<std::size_t> max_frames;
  /// Stop after this long without a datagram, once at least one frame arrived.
  std::optional<std::chrono::milliseconds> idle_timeout;
  /// Datagrams waiting for the tracker; the receiver blocks when full.
  std::size_t inbound_capacity = 4096;
};

/// Receives newline-delimited detection records over UDP (one or more per
/// datagram) on a reader thread and processes them in arrival order.
PipelineStats run_stream_pipeline(Pipeline& pipeline, UdpSocket& socket,
                                  const StreamOptions& options, FrameSinks sinks,
                                  std::stop_token stop);

}  // namespace szloca
