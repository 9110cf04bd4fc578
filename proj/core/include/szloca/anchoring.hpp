#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "szloca/geometry.hpp"

namespace szloca {

struct Keypoint {
  std::string name;
  Vec2 pixel = Vec2::Zero();
  double confidence = 0.0;
  bool present = true;
};

struct BoundingBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double width = 0.0;
  double height = 0.0;

  [[nodiscard]] Vec2 bottom_center() const { return {u_min + width / 2.0, v_min + height}; }
};

/// One per-frame observation in pixel space. Keypoint storage order carries
/// no meaning; lookups go by name.
struct Detection2D {
  std::vector<Keypoint> keypoints;
  std::optional<BoundingBox> bbox;
  double confidence = 1.0;

  [[nodiscard]] const Keypoint* find(std::string_view name) const;
  [[nodiscard]] std::size_t present_count() const;

  /// Structural checks: confidences in [0, 1], finite pixels, positive bbox.
  /// A detection with no usable content is allowed; anchoring will skip it.
  void validate() const;
};

struct DetectionFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<Detection2D> detections;
};

/// Joint names plus the roles anchoring cares about.
struct SkeletonLayout {
  std::vector<std::string> joint_names;
  std::string head;
  std::vector<std::string> feet;
  std::vector<std::string> torso;

  /// 17-joint layout (nose, eyes, ears, shoulders, elbows, wrists, hips, knees, ankles).
  static SkeletonLayout coco17();

  [[nodiscard]] bool has_joint(std::string_view name) const;
  void validate() const;
};

enum class AnchorStrategy { Head, Feet, TorsoGrounded, BboxBottomCenter };

/// Config/CLI spelling: head, feet, torso, bbox.
std::string_view to_string(AnchorStrategy strategy);
AnchorStrategy parse_anchor_strategy(std::string_view name);

struct AnchorConfig {
  AnchorStrategy strategy = AnchorStrategy::Feet;
  double min_joint_confidence = 0.3;
  std::vector<AnchorStrategy> fallback_chain = {
      AnchorStrategy::Feet, AnchorStrategy::BboxBottomCenter, AnchorStrategy::TorsoGrounded,
      AnchorStrategy::Head};
  double torso_height_m = 1.0;

  void validate() const;
};

struct AnchorResult {
  Vec2 pixel = Vec2::Zero();
  AnchorStrategy strategy_used = AnchorStrategy::Feet;
  bool needs_torso_correction = false;
};

/// Tries the configured strategy, then walks the fallback chain.
/// nullopt means no strategy was usable and the detection should be skipped.
std::optional<AnchorResult> select_anchor(const Detection2D& det, const SkeletonLayout& layout,
                                          const AnchorConfig& cfg);

/// Evaluates a single strategy without fallback.
std::optional<AnchorResult> try_anchor(AnchorStrategy strategy, const Detection2D& det,
                                       const SkeletonLayout& layout, double min_confidence);

}  // namespace szloca
