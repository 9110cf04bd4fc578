#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "szloca/anchoring.hpp"
#include "szloca/camera_model.hpp"
#include "szloca/ground_surface.hpp"
#include "szloca/lifting.hpp"
#include "szloca/simulation.hpp"
#include "szloca/tracking.hpp"

namespace szloca {

enum class LiftMethod { Ray, Homography };

enum class EmitPosition { Raw, Smoothed };

struct IoConfig {
  std::optional<std::string> input_path;
  std::optional<std::string> listen;  // udp://HOST:PORT
  std::optional<std::string> output_path;
  std::optional<std::string> emit;  // osc://HOST:PORT
  std::size_t emit_queue_capacity = 1024;
  EmitPosition emit_position = EmitPosition::Smoothed;

  /// Exactly one source and at least one sink. Throws Error(InvalidConfig).
  void validate() const;
};

struct PipelineConfig {
  CameraRig rig = default_scene_rig();
  GroundModel ground = GroundPlane::horizontal();
  LiftMethod lift_method = LiftMethod::Ray;
  /// Used by LiftMethod::Homography; derived from the rig when absent.
  std::optional<GroundHomography> homography;
  SkeletonLayout layout = SkeletonLayout::coco17();
  AnchorConfig anchor;
  bool place_skeletons = true;
  TrackerParams tracker;
  IoConfig io;

  /// Cross-block checks (homography needs a planar ground, and so on).
  void validate() const;
};

/// Every block is optional; unknown keys are rejected. Errors are
/// Error(InvalidConfig), or Error(TiltCheck) for a rig looking at or above
/// the horizon.
PipelineConfig parse_pipeline_config(const nlohmann::json& doc);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SceneConfig {
  SimScene scene;
  PipelineConfig pipeline;  // shares the scene's rig and ground
  EvaluationOptions evaluation;
};

SceneConfig parse_scene_config(const nlohmann::json& doc);
SceneConfig load_scene_config(const std::filesystem::path& path);

CameraRig parse_rig(const nlohmann::json& block);
GroundModel parse_ground(const nlohmann::json& block);
nlohmann::json homography_to_json(const GroundHomography& h);

}  // namespace szloca
