#include "szloca/anchoring.hpp"

#include <algorithm>
#include <cmath>

#include "szloca/error.hpp"

namespace szloca {

const Keypoint* Detection2D::find(std::string_view name) const {
  for (const auto& kp : keypoints) {
    if (kp.name == name) return &kp;
  }
  return nullptr;
}

std::size_t Detection2D::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(keypoints.begin(), keypoints.end(), [](const Keypoint& k) { return k.present; }));
}

void Detection2D::validate() const {
  for (const auto& kp : keypoints) {
    if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "keypoint '" + kp.name + "' confidence outside [0,1]");
    }
    if (kp.present && !kp.pixel.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "keypoint '" + kp.name + "' has a non-finite pixel");
    }
  }
  if (bbox) {
    if (!(bbox->width > 0.0 && bbox->height > 0.0) || !std::isfinite(bbox->u_min) ||
        !std::isfinite(bbox->v_min)) {
      throw Error(ErrorCode::InvalidArgument, "bounding box must be finite with positive size");
    }
  }
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "detection confidence outside [0,1]");
  }
}

SkeletonLayout SkeletonLayout::coco17() {
  SkeletonLayout layout;
  layout.joint_names = {"nose",          "left_eye",       "right_eye",  "left_ear",
                        "right_ear",     "left_shoulder",  "right_shoulder",
                        "left_elbow",    "right_elbow",    "left_wrist", "right_wrist",
                        "left_hip",      "right_hip",      "left_knee",  "right_knee",
                        "left_ankle",    "right_ankle"};
  layout.head = "nose";
  layout.feet = {"left_ankle", "right_ankle"};
  layout.torso = {"left_hip", "right_hip"};
  return layout;
}

bool SkeletonLayout::has_joint(std::string_view name) const {
  return std::find(joint_names.begin(), joint_names.end(), name) != joint_names.end();
}

void SkeletonLayout::validate() const {
  auto check = [&](const std::string& name) {
    if (!has_joint(name)) {
      throw Error(ErrorCode::InvalidConfig, "skeleton role references unknown joint '" + name + "'");
    }
  };
  check(head);
  std::for_each(feet.begin(), feet.end(), check);
  std::for_each(torso.begin(), torso.end(), check);
}

std::string_view to_string(AnchorStrategy strategy) {
  switch (strategy) {
    case AnchorStrategy::Head:
      return "head";
    case AnchorStrategy::Feet:
      return "feet";
    case AnchorStrategy::TorsoGrounded:
      return "torso";
    case AnchorStrategy::BboxBottomCenter:
      return "bbox";
  }
  return "unknown";
}

AnchorStrategy parse_anchor_strategy(std::string_view name) {
  if (name == "head") return AnchorStrategy::Head;
  if (name == "feet") return AnchorStrategy::Feet;
  if (name == "torso") return AnchorStrategy::TorsoGrounded;
  if (name == "bbox") return AnchorStrategy::BboxBottomCenter;
  throw Error(ErrorCode::InvalidConfig,
              "unknown anchor strategy '" + std::string(name) + "' (expected head|feet|torso|bbox)");
}

void AnchorConfig::validate() const {
  if (!(min_joint_confidence >= 0.0 && min_joint_confidence <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "min_joint_confidence must be in [0,1]");
  }
  if (fallback_chain.empty()) {
    throw Error(ErrorCode::InvalidConfig, "fallback chain must not be empty");
  }
  for (auto it = fallback_chain.begin(); it != fallback_chain.end(); ++it) {
    if (std::find(std::next(it), fallback_chain.end(), *it) != fallback_chain.end()) {
      throw Error(ErrorCode::InvalidConfig,
                  "fallback chain lists '" + std::string(to_string(*it)) + "' twice");
    }
  }
  if (!(torso_height_m >= 0.0) || !std::isfinite(torso_height_m)) {
    throw Error(ErrorCode::InvalidConfig, "torso_height_m must be a finite non-negative length");
  }
}

namespace {

// Mean pixel over the named joints that are present and confident enough.
// Iterates in layout order so the result does not depend on storage order.
std::optional<Vec2> confident_mean(const Detection2D& det, const std::vector<std::string>& names,
                                   double min_confidence) {
  Vec2 sum = Vec2::Zero();
  int n = 0;
  for (const auto& name : names) {
    const Keypoint* kp = det.find(name);
    if (kp && kp->present && kp->confidence >= min_confidence) {
      sum += kp->pixel;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return Vec2(sum / n);
}

}  // namespace

std::optional<AnchorResult> try_anchor(AnchorStrategy strategy, const Detection2D& det,
                                       const SkeletonLayout& layout, double min_confidence) {
  std::optional<Vec2> pixel;
  switch (strategy) {
    case AnchorStrategy::Head:
      pixel = confident_mean(det, {layout.head}, min_confidence);
      break;
    case AnchorStrategy::Feet:
      pixel = confident_mean(det, layout.feet, min_confidence);
      break;
    case AnchorStrategy::TorsoGrounded:
      pixel = confident_mean(det, layout.torso, min_confidence);
      break;
    case AnchorStrategy::BboxBottomCenter:
      if (det.bbox) pixel = det.bbox->bottom_center();
      break;
  }
  if (!pixel) return std::nullopt;
  return AnchorResult{*pixel, strategy, strategy == AnchorStrategy::TorsoGrounded};
}

std::optional<AnchorResult> select_anchor(const Detection2D& det, const SkeletonLayout& layout,
                                          const AnchorConfig& cfg) {
  if (auto hit = try_anchor(cfg.strategy, det, layout, cfg.min_joint_confidence)) {
    return hit;
  }
  for (AnchorStrategy fallback : cfg.fallback_chain) {
    if (fallback == cfg.strategy) continue;
    if (auto hit = try_anchor(fallback, det, layout, cfg.min_joint_confidence)) {
      return hit;
    }
  }
  return std::nullopt;
}

}  // namespace szloca
