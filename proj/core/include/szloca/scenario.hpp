#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "szloca/config.hpp"
#include "szloca/pipeline.hpp"
#include "szloca/simulation.hpp"

namespace szloca {

/// Optional JSONL sinks for a simulated run.
struct ScenarioOutputs {
  std::ostream* truth = nullptr;
  std::ostream* detections = nullptr;
  std::ostream* tracks = nullptr;
};

struct ScenarioResult {
  Metrics metrics;
  PipelineStats stats;
  std::size_t frames = 0;
  std::size_t agents = 0;
  /// Mean of the first-order lift error over in-view truth agent-frames.
  double mean_first_order_error_m = 0.0;
  double elapsed_s = 0.0;
};

/// simulate -> synthesize detections -> pipeline -> evaluate, frame by frame.
ScenarioResult run_scenario(const SceneConfig& config, ScenarioOutputs outputs = {});

nlohmann::json metrics_to_json(const Metrics& m);
nlohmann::json stats_to_json(const PipelineStats& s);
nlohmann::json scenario_report(const SceneConfig& config, const ScenarioResult& result);

}  // namespace szloca
