#include "szloca/pipeline.hpp"

#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "szloca/error.hpp"
#include "szloca/osc.hpp"

namespace szloca {
namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(50);

template <typename F>
auto with_frame_context(std::int64_t frame_index, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string prefix = "frame " + std::to_string(frame_index) + ": ";
    const std::string what = e.what();
    if (what.rfind(prefix, 0) == 0) throw;
    throw Error(e.code(), prefix + what);
  }
}

void refresh_emitter_stats(const FrameSinks& sinks, PipelineStats& stats) {
  if (sinks.emitter == nullptr) return;
  const EmitterStats es = sinks.emitter->stats();
  stats.osc_enqueued = es.enqueued;
  stats.osc_sent = es.sent;
  stats.osc_dropped = es.dropped;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config)
    : config_(std::move(config)), tracker_(config_.tracker) {
  config_.validate();
  if (config_.lift_method == LiftMethod::Homography) {
    homography_ = config_.homography
                      ? *config_.homography
                      : homography_from_camera(config_.rig, std::get<GroundPlane>(config_.ground));
  }
}

std::optional<Vec3> Pipeline::lift(const AnchorResult& anchor) const {
  if (!homography_) return lift_anchor(anchor, config_.rig, config_.ground, config_.anchor);
  // The homography only describes the ground itself, so mid-body anchors cannot use it.
  if (anchor.needs_torso_correction) return std::nullopt;
  return lift_via_homography(*homography_, anchor.pixel);
}

std::vector<LiftedDetection> Pipeline::lift_frame(const DetectionFrame& frame) {
  std::vector<LiftedDetection> lifted;
  lifted.reserve(frame.detections.size());
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection2D& det = frame.detections[i];
    ++stats_.detections;
    const auto anchor = select_anchor(det, config_.layout, config_.anchor);
    if (!anchor) {
      ++stats_.anchor_misses;
      ++stats_.lift_misses;
      continue;
    }
    if (!config_.rig.in_image(anchor->pixel)) ++stats_.outside_image_anchors;
    const auto ground_point = lift(*anchor);
    if (!ground_point) {
      ++stats_.lift_misses;
      continue;
    }
    LiftedDetection out;
    out.ground_point = *ground_point;
    out.anchor = *anchor;
    out.source_index = i;
    if (config_.place_skeletons) out.skeleton3d = place_skeleton(det, *ground_point, config_.rig);
    lifted.push_back(std::move(out));
  }
  return lifted;
}

TrackFrame Pipeline::process(const DetectionFrame& frame) {
  return with_frame_context(frame.frame_index, [&] {
    const auto lifted = lift_frame(frame);
    TrackFrame out;
    out.frame_index = frame.frame_index;
    out.timestamp = frame.timestamp;
    out.tracks = tracker_.step(frame.frame_index, frame.timestamp, lifted);
    ++stats_.frames;
    stats_.active_tracks = tracker_.tracks().size();
    stats_.peak_tracks = std::max(stats_.peak_tracks, stats_.active_tracks);
    return out;
  });
}

void deliver(const TrackFrame& frame, FrameSinks& sinks, PipelineStats& stats) {
  with_frame_context(frame.frame_index, [&] {
    if (sinks.records != nullptr) {
      *sinks.records << serialize_track_record(frame) << '\n';
      if (!*sinks.records) throw Error(ErrorCode::Io, "failed to write track record");
      ++stats.records_written;
    }
    if (sinks.emitter != nullptr) {
      for (const auto& t : frame.tracks) {
        const Vec3& p = sinks.emit_position == EmitPosition::Smoothed ? t.smoothed : t.position;
        if (t.id > static_cast<TrackId>(INT32_MAX)) {
          throw Error(ErrorCode::Encode, "track id exceeds the int32 range of the wire format");
        }
        sinks.emitter->enqueue(encode_osc_track(
            static_cast<std::int32_t>(t.id),
            {static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z())}));
      }
    }
  });
}

PipelineStats run_file_pipeline(Pipeline& pipeline, std::istream& in, FrameSinks sinks) {
  DetectionStreamReader reader(&in);
  PipelineStats io_stats;
  while (auto frame = reader.next()) {
    deliver(pipeline.process(*frame), sinks, io_stats);
  }
  if (sinks.records != nullptr) sinks.records->flush();
  if (sinks.emitter != nullptr) sinks.emitter->flush();
  PipelineStats stats = pipeline.stats();
  stats.records_written = io_stats.records_written;
  refresh_emitter_stats(sinks, stats);
  return stats;
}

PipelineStats run_stream_pipeline(Pipeline& pipeline, UdpSocket& socket,
                                  const StreamOptions& options, FrameSinks sinks,
                                  std::stop_token stop) {
  std::mutex mutex;
  std::condition_variable_any cv;
  std::deque<std::string> inbound;
  std::exception_ptr receive_error;
  bool receiver_done = false;
  auto last_arrival = std::chrono::steady_clock::now();
  bool any_arrival = false;

  std::jthread receiver([&](std::stop_token rs) {
    try {
      while (!rs.stop_requested()) {
        auto datagram = socket.receive(kPollInterval);
        if (!datagram) continue;
        std::unique_lock lock(mutex);
        cv.wait(lock, rs, [&] { return inbound.size() < options.inbound_capacity; });
        if (rs.stop_requested()) break;
        inbound.push_back(std::move(*datagram));
        last_arrival = std::chrono::steady_clock::now();
        any_arrival = true;
        cv.notify_all();
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      receive_error = std::current_exception();
    }
    std::lock_guard lock(mutex);
    receiver_done = true;
    cv.notify_all();
  });

  DetectionStreamReader reader;
  PipelineStats io_stats;
  std::size_t processed = 0;
  const auto finished = [&] { return options.max_frames && processed >= *options.max_frames; };

  while (!finished() && !stop.stop_requested()) {
    std::string datagram;
    {
      std::unique_lock lock(mutex);
      cv.wait_for(lock, stop, kPollInterval, [&] { return !inbound.empty() || receiver_done; });
      if (receive_error) std::rethrow_exception(receive_error);
      if (inbound.empty()) {
        if (receiver_done) break;
        if (options.idle_timeout && any_arrival &&
            std::chrono::steady_clock::now() - last_arrival >= *options.idle_timeout) {
          break;
        }
        continue;
      }
      datagram = std::move(inbound.front());
      inbound.pop_front();
      cv.notify_all();
    }
    std::size_t begin = 0;
    while (begin < datagram.size() && !finished()) {
      std::size_t end = datagram.find('\n', begin);
      if (end == std::string::npos) end = datagram.size();
      const std::string_view line(datagram.data() + begin, end - begin);
      begin = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      deliver(pipeline.process(reader.accept(line)), sinks, io_stats);
      ++processed;
    }
  }

  receiver.request_stop();
  receiver.join();
  if (sinks.records != nullptr) sinks.records->flush();
  if (sinks.emitter != nullptr) sinks.emitter->flush();
  PipelineStats stats = pipeline.stats();
  stats.records_written = io_stats.records_written;
  refresh_emitter_stats(sinks, stats);
  return stats;
}

}  // namespace szloca
