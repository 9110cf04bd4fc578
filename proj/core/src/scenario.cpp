#include "szloca/scenario.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "szloca/records.hpp"

namespace szloca {

ScenarioResult run_scenario(const SceneConfig& config, ScenarioOutputs outputs) {
  const auto start = std::chrono::steady_clock::now();
  const SimScene& scene = config.scene;
  const std::vector<TruthFrame> truth = generate_truth(scene);
  const Vec3 normal = ground_normal(scene.ground);

  Pipeline pipeline(config.pipeline);
  FrameSinks sinks;
  sinks.records = outputs.tracks;
  PipelineStats io_stats;
  std::vector<TrackFrame> produced;
  produced.reserve(truth.size());

  double bound_sum = 0.0;
  std::size_t bound_count = 0;
  for (const auto& frame : truth) {
    const auto synthetic = synthesize_detections(frame, scene.rig, scene.noise, scene.seed);
    const DetectionFrame detections = to_detection_frame(frame, synthetic);
    if (outputs.truth != nullptr) *outputs.truth << serialize_truth_record(frame) << '\n';
    if (outputs.detections != nullptr) {
      *outputs.detections << serialize_detection_record(detections) << '\n';
    }
    produced.push_back(pipeline.process(detections));
    deliver(produced.back(), sinks, io_stats);
    for (const auto& agent : frame.agents) {
      if (!agent.in_view) continue;
      bound_sum += first_order_lift_error(scene.rig, agent.footprint, normal,
                                          scene.noise.pixel_noise_std);
      ++bound_count;
    }
  }

  ScenarioResult result;
  result.metrics = evaluate(truth, produced, config.evaluation);
  result.stats = pipeline.stats();
  result.stats.records_written = io_stats.records_written;
  result.frames = truth.size();
  result.agents = truth.empty() ? 0 : truth.front().agents.size();
  result.mean_first_order_error_m = bound_count == 0 ? 0.0 : bound_sum / static_cast<double>(bound_count);
  result.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : m.distance_buckets) {
    buckets.push_back({{"min_m", b.min_m}, {"max_m", b.max_m}, {"count", b.count},
                       {"mean_error_m", b.mean_error_m}});
  }
  return {{"mean_error_m", m.mean_error_m},
          {"median_error_m", m.median_error_m},
          {"max_error_m", m.max_error_m},
          {"matched", m.matched},
          {"truth_instances", m.truth_instances},
          {"missed", m.missed},
          {"miss_rate", m.miss_rate},
          {"identity_switches", m.identity_switches},
          {"unmatched_outputs", m.unmatched_outputs},
          {"false_tracks", m.false_tracks},
          {"distance_buckets", buckets}};
}

nlohmann::json stats_to_json(const PipelineStats& s) {
  return {{"frames", s.frames},
          {"detections", s.detections},
          {"anchor_misses", s.anchor_misses},
          {"lift_misses", s.lift_misses},
          {"outside_image_anchors", s.outside_image_anchors},
          {"active_tracks", s.active_tracks},
          {"peak_tracks", s.peak_tracks},
          {"records_written", s.records_written},
          {"osc_enqueued", s.osc_enqueued},
          {"osc_sent", s.osc_sent},
          {"osc_dropped", s.osc_dropped}};
}

nlohmann::json scenario_report(const SceneConfig& config, const ScenarioResult& result) {
  return {{"seed", config.scene.seed},
          {"frames", result.frames},
          {"agents", result.agents},
          {"pixel_noise_std", config.scene.noise.pixel_noise_std},
          {"mean_first_order_error_m", result.mean_first_order_error_m},
          {"elapsed_s", result.elapsed_s},
          {"metrics", metrics_to_json(result.metrics)},
          {"pipeline", stats_to_json(result.stats)}};
}

}  // namespace szloca
