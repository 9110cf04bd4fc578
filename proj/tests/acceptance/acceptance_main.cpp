// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "szloca/anchoring.hpp"
#include "szloca/assignment.hpp"
#include "szloca/camera_model.hpp"
#include "szloca/config.hpp"
#include "szloca/lifting.hpp"
#include "szloca/osc.hpp"
#include "szloca/pipeline.hpp"
#include "szloca/scenario.hpp"
#include "szloca/simulation.hpp"
#include "test_support.hpp"

namespace {

using namespace szloca;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Detection2D render(const CameraRig& rig, const std::vector<NamedPoint>& joints) {
  Detection2D det;
  for (const auto& j : joints) {
    const auto s = world_to_screen(rig, j.position);
    if (s) det.keypoints.push_back(Keypoint{j.name, s->pixel, 1.0, true});
  }
  return det;
}

double planar(const Vec3& a, const Vec3& b) { return Vec2(a.x() - b.x(), a.z() - b.z()).norm(); }

// Least-squares line y = a + b x; returns R^2.
double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy * sxy / (sxx * syy);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

Outcome round_trip_geometry() {
  std::mt19937_64 rng(1001);
  const AnchorConfig cfg;
  const GroundModel ground = GroundPlane::horizontal();
  double worst = 0.0;
  std::size_t points = 0, failures = 0;
  const auto start = Clock::now();
  for (int r = 0; r < 1000; ++r) {
    const CameraRig rig = testing::random_rig(rng);
    for (int i = 0; i < 20; ++i) {
      const auto p = testing::random_visible_ground_point(rig, rng);
      if (!p) continue;
      ++points;
      const auto s = world_to_screen(rig, *p);
      const auto back = s ? lift_anchor(AnchorResult{s->pixel}, rig, ground, cfg) : std::nullopt;
      const double err = back ? (*back - *p).norm() : INFINITY;
      worst = std::max(worst, err);
      if (!(err < 1e-6)) ++failures;
    }
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && points >= 19000 && elapsed < 1.0,
          fmt("%zu points on 1000 rigs, worst %.2e m, %zu over 1e-6, %.3f s", points, worst,
              failures, elapsed)};
}

Outcome ray_homography_cross_oracle() {
  std::mt19937_64 rng(2002);
  const GroundPlane plane = GroundPlane::horizontal();
  const AnchorConfig cfg;
  double worst = 0.0;
  std::size_t pixels = 0, failures = 0;
  for (int r = 0; r < 50; ++r) {
    const CameraRig rig = testing::random_rig(rng);
    const GroundHomography h = homography_from_camera(rig, plane);
    for (int i = 0; i < 500; ++i) {
      const auto p = testing::random_visible_ground_point(rig, rng);
      if (!p) continue;
      const Vec2 px = world_to_screen(rig, *p)->pixel;
      ++pixels;
      const auto ray = lift_anchor(AnchorResult{px}, rig, plane, cfg);
      const auto hom = lift_via_homography(h, px);
      const double err = ray && hom ? (*ray - *hom).norm() : INFINITY;
      worst = std::max(worst, err);
      if (!(err < 1e-6)) ++failures;
    }
  }
  return {failures == 0 && pixels == 25000,
          fmt("%zu pixels on 50 rigs, worst %.2e m", pixels, worst)};
}

Outcome calibration_from_exact_pairs() {
  std::mt19937_64 rng(3003);
  const GroundPlane plane = GroundPlane::horizontal();
  const AnchorConfig cfg;
  double worst = 0.0;
  std::size_t probes = 0, failures = 0;
  for (int r = 0; r < 50; ++r) {
    const CameraRig rig = testing::random_rig(rng);
    std::vector<CorrespondencePair> pairs;
    while (pairs.size() < 8) {
      const auto p = testing::random_visible_ground_point(rig, rng, 60.0);
      if (!p) continue;
      pairs.push_back({world_to_screen(rig, *p)->pixel, Vec2(p->x(), p->z())});
    }
    const HomographyFit fit = fit_ground_homography(pairs);
    for (int i = 0; i < 200; ++i) {
      const auto p = testing::random_visible_ground_point(rig, rng, 60.0);
      if (!p) continue;
      const Vec2 px = world_to_screen(rig, *p)->pixel;
      ++probes;
      const auto ray = lift_anchor(AnchorResult{px}, rig, plane, cfg);
      const auto fitted = lift_via_homography(fit.homography, px);
      const double err = ray && fitted ? (*ray - *fitted).norm() : INFINITY;
      worst = std::max(worst, err);
      if (!(err < 1e-4)) ++failures;
    }
  }
  return {failures == 0 && probes > 0,
          fmt("8 pairs per rig, %zu probe pixels on 50 rigs, worst %.2e m", probes, worst)};
}

SceneConfig noise_free_scene() {
  SceneConfig cfg;
  cfg.scene.agent_count = 10;
  cfg.scene.area_size = {20.0, 20.0};
  cfg.scene.noise = {0.0, 0.0};
  cfg.scene.seed = 4;
  cfg.pipeline.anchor.strategy = AnchorStrategy::Feet;
  cfg.pipeline.tracker.n_init = 1;
  cfg.pipeline.tracker.measurement_std = 1e-3;
  cfg.evaluation.reference_point = cfg.scene.rig.position();
  return cfg;
}

Outcome noise_free_end_to_end() {
  const auto start = Clock::now();
  const ScenarioResult r = run_scenario(noise_free_scene());
  const double elapsed = seconds_since(start);
  const Metrics& m = r.metrics;
  return {m.mean_error_m < 1e-3 && m.identity_switches == 0 && m.miss_rate == 0.0 &&
              m.truth_instances > 0 && elapsed < 10.0,
          fmt("mean %.2e m, switches %zu, miss rate %.4f over %zu agent-frames, %.2f s",
              m.mean_error_m, m.identity_switches, m.miss_rate, m.truth_instances, elapsed)};
}

Outcome noisy_end_to_end() {
  const std::vector<double> sigmas = {0.5, 1.0, 2.0, 4.0};
  std::vector<double> errors;
  double error_at_2 = 0.0, bound_at_2 = 0.0;
  for (double sigma : sigmas) {
    SceneConfig cfg;
    cfg.scene.noise.pixel_noise_std = sigma;
    cfg.scene.seed = 5;
    cfg.evaluation.reference_point = cfg.scene.rig.position();
    const ScenarioResult r = run_scenario(cfg);
    errors.push_back(r.metrics.mean_error_m);
    if (sigma == 2.0) {
      error_at_2 = r.metrics.mean_error_m;
      bound_at_2 = r.mean_first_order_error_m;
    }
  }
  const double r2 = r_squared(sigmas, errors);
  return {error_at_2 < 1.5 * bound_at_2 && r2 > 0.95,
          fmt("sigma 2: %.4f m vs 1.5 x %.4f m; errors %.4f/%.4f/%.4f/%.4f, R^2 %.4f", error_at_2,
              bound_at_2, errors[0], errors[1], errors[2], errors[3], r2)};
}

Outcome orthographic_crowding() {
  const CameraRig persp = default_scene_rig();
  const GroundPlane plane = GroundPlane::horizontal();
  // Same pose; scale matched to the perspective view at the bottom image edge.
  const Vec2 bottom(persp.intrinsics().image_width / 2.0, persp.intrinsics().image_height);
  const Vec3 near_hit = *intersect_plane(screen_to_ray(persp, bottom).ray, plane);
  const double depth = world_to_screen(persp, near_hit)->depth;
  const CameraRig ortho(
      CameraIntrinsics::orthographic(persp.intrinsics().image_width, persp.intrinsics().image_height,
                                     depth / persp.intrinsics().focal_px),
      persp.pose());

  std::mt19937_64 rng(6006);
  constexpr double kMaxDistance = 40.0;
  constexpr double kBin = 1.0;
  std::vector<double> distances, errors;
  std::vector<double> bin_sum(static_cast<std::size_t>(kMaxDistance / kBin), 0.0);
  std::vector<std::size_t> bin_count(bin_sum.size(), 0);
  while (distances.size() < 20000) {
    const auto p = testing::random_visible_ground_point(persp, rng);
    if (!p) continue;
    const double d = planar(*p, persp.position());
    if (d >= kMaxDistance) continue;
    const Vec2 px = world_to_screen(persp, *p)->pixel;
    const auto lifted = intersect_plane(screen_to_ray(ortho, px).ray, plane);
    if (!lifted) continue;
    const double e = planar(*lifted, *p);
    distances.push_back(d);
    errors.push_back(e);
    const auto b = static_cast<std::size_t>(d / kBin);
    bin_sum[b] += e;
    ++bin_count[b];
  }
  std::vector<double> centers, means;
  for (std::size_t b = 0; b < bin_sum.size(); ++b) {
    if (bin_count[b] < 20) continue;
    centers.push_back((static_cast<double>(b) + 0.5) * kBin);
    means.push_back(bin_sum[b] / static_cast<double>(bin_count[b]));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] > means[i - 1];
  const double rho = testing::spearman(centers, means);
  const double rho_points = testing::spearman(distances, errors);
  return {rho > 0.9 && monotone && means.size() >= 10,
          fmt("%zu 1 m bins, mean error %.2f -> %.2f m, binned rank corr %.4f, monotone %s "
              "(per point %.4f)",
              means.size(), means.front(), means.back(), rho, monotone ? "yes" : "no", rho_points)};
}

Outcome anchor_laws() {
  const CameraRig rig = default_scene_rig();
  const GroundModel ground = GroundPlane::horizontal();
  const SkeletonLayout layout = SkeletonLayout::coco17();
  const Vec3 lateral = AgentTemplate::lateral_axis_for(rig);
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> x(-8.0, 8.0), z(-24.0, -6.0);
  const std::vector<double> heights = {1.5, 1.6, 1.7, 1.8, 1.9};

  double feet_spread = 0.0, torso_worst = 0.0;
  bool head_increasing = true;
  for (int i = 0; i < 50; ++i) {
    const Vec3 foot(x(rng), 0.0, z(rng));
    std::optional<Vec3> first_feet;
    double last_head = -1.0;
    for (double h : heights) {
      const Detection2D det = render(rig, AgentTemplate::joints(foot, h, lateral));
      AnchorConfig cfg;
      const auto feet = try_anchor(AnchorStrategy::Feet, det, layout, 0.0);
      const auto feet_hit = lift_anchor(*feet, rig, ground, cfg);
      if (!first_feet) first_feet = feet_hit;
      feet_spread = std::max(feet_spread, (*feet_hit - *first_feet).norm());

      const auto head = try_anchor(AnchorStrategy::Head, det, layout, 0.0);
      const double head_err = planar(*lift_anchor(*head, rig, ground, cfg), foot);
      head_increasing = head_increasing && head_err > last_head;
      last_head = head_err;

      cfg.torso_height_m = AgentTemplate::kHipFraction * h;
      const auto torso = try_anchor(AnchorStrategy::TorsoGrounded, det, layout, 0.0);
      torso_worst = std::max(torso_worst, (*lift_anchor(*torso, rig, ground, cfg) - foot).norm());
    }
  }
  return {feet_spread < 1e-9 && head_increasing && torso_worst < 1e-6,
          fmt("feet spread across heights %.2e m, head error increasing %s, torso worst %.2e m",
              feet_spread, head_increasing ? "yes" : "no", torso_worst)};
}

Outcome skeleton_scale() {
  const CameraRig rig = default_scene_rig();
  const GroundModel ground = GroundPlane::horizontal();
  const Vec3 lateral = AgentTemplate::lateral_axis_for(rig);
  const Vec3 ahead = horizontal(rig.pose().forward()).normalized();
  double worst = 0.0;
  std::string per_distance;
  for (double distance : {5.0, 20.0}) {
    double worst_here = 0.0;
    for (double h : {1.5, 1.7, 1.9}) {
      const Vec3 foot = Vec3(rig.position().x(), 0.0, rig.position().z()) + distance * ahead;
      const Detection2D det = render(rig, AgentTemplate::joints(foot, h, lateral));
      const auto anchor = select_anchor(det, SkeletonLayout::coco17(), AnchorConfig{});
      const auto ground_point = lift_anchor(*anchor, rig, ground, AnchorConfig{});
      const auto placed = place_skeleton(det, *ground_point, rig);
      double nose = 0.0, ankles = 0.0;
      for (const auto& j : placed) {
        if (j.name == "nose") nose = j.position.y();
        if (j.name == "left_ankle" || j.name == "right_ankle") ankles += j.position.y() / 2.0;
      }
      const double truth = AgentTemplate::kNoseFraction * h;
      worst_here = std::max(worst_here, std::abs((nose - ankles) - truth) / truth);
    }
    worst = std::max(worst, worst_here);
    per_distance += fmt("%s%.0f m: %.3f%%", per_distance.empty() ? "" : ", ", distance, 100.0 * worst_here);
  }
  return {worst < 0.01, "relative height error " + per_distance};
}

double brute_force_cost(const Eigen::MatrixXd& c) {
  const bool transpose = c.rows() > c.cols();
  const Eigen::MatrixXd m = transpose ? Eigen::MatrixXd(c.transpose()) : c;
  std::vector<int> cols(static_cast<std::size_t>(m.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) total += m(r, cols[static_cast<std::size_t>(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

Outcome tracker_checks() {
  std::mt19937_64 rng(9009);
  std::uniform_int_distribution<int> dim(1, 7);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  std::size_t problems = 0, mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::MatrixXd c(dim(rng), dim(rng));
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = std::round(cost(rng) * 4.0) / 4.0;
    const Assignment a = solve_gated_assignment(c, std::numeric_limits<double>::infinity());
    ++problems;
    if (std::abs(a.total_cost - brute_force_cost(c)) > 1e-9 ||
        a.pairs.size() != static_cast<std::size_t>(std::min(c.rows(), c.cols()))) {
      ++mismatches;
    }
  }

  SceneConfig crossing;
  crossing.scene.noise = {0.0, 0.0};
  crossing.scene.duration_s = 12.0;
  crossing.scene.agents = {AgentSpec{1.7, 1.0, {Vec2(-6, -15), Vec2(6, -15)}},
                           AgentSpec{1.6, 1.0, {Vec2(0, -22), Vec2(0, -8)}}};
  crossing.pipeline.tracker.n_init = 1;
  const ScenarioResult cross = run_scenario(crossing);

  SceneConfig noisy;
  noisy.scene.seed = 99;
  std::ostringstream a, b;
  run_scenario(noisy, {nullptr, nullptr, &a});
  run_scenario(noisy, {nullptr, nullptr, &b});
  const bool identical = !a.str().empty() && a.str() == b.str();

  return {mismatches == 0 && cross.metrics.identity_switches == 0 &&
              cross.metrics.truth_instances > 0 && identical,
          fmt("%zu/%zu assignments match brute force, crossing switches %zu, repeat runs %s",
              problems - mismatches, problems, cross.metrics.identity_switches,
              identical ? "byte-identical" : "differ")};
}

Outcome osc_golden_vector() {
  const std::vector<std::uint8_t> expected = {
      '/',  's',  'z',  'l',  'o',  'c',  'a',  '/',  't',  'r',  'a',  'c',  'k',  0,    0,    0,
      ',',  'i',  'f',  'f',  'f',  0,    0,    0,    0x00, 0x00, 0x00, 0x01, 0x3F, 0x80, 0x00, 0x00,
      0x00, 0x00, 0x00, 0x00, 0xC0, 0xA0, 0x00, 0x00};
  const auto bytes = encode_osc_track(1, {1.0f, 0.0f, -5.0f});
  return {bytes == expected, fmt("%zu bytes, %s", bytes.size(),
                                 bytes == expected ? "identical to the reference" : "mismatch")};
}

// Pipeline-only time per frame for a pre-rendered scene.
std::pair<double, double> per_frame_cost(int agents, double area_side) {
  SimScene scene;
  scene.agent_count = agents;
  scene.area_size = {area_side, area_side};
  scene.area_center = {0.0, -6.0 - area_side / 2.0};
  scene.duration_s = 8.0;
  scene.seed = 11;
  std::vector<DetectionFrame> frames;
  std::size_t detections = 0;
  for (const auto& t : generate_truth(scene)) {
    frames.push_back(to_detection_frame(t, synthesize_detections(t, scene.rig, scene.noise, scene.seed)));
    detections += frames.back().detections.size();
  }
  PipelineConfig cfg;
  Pipeline pipeline(cfg);
  const auto start = Clock::now();
  for (const auto& f : frames) pipeline.process(f);
  const double elapsed = seconds_since(start);
  const auto n = static_cast<double>(frames.size());
  return {static_cast<double>(detections) / n, elapsed / n};
}

Outcome throughput() {
  SceneConfig big;
  big.scene.agent_count = 100;
  big.scene.duration_s = 40.0;  // 1000 frames at 25 Hz
  big.scene.seed = 12;
  std::ostringstream sink;
  const auto start = Clock::now();
  const ScenarioResult r = run_scenario(big, {nullptr, nullptr, &sink});
  const double elapsed = seconds_since(start);

  std::vector<double> log_n, log_t;
  std::string table;
  for (int agents : {25, 50, 100, 200, 400}) {
    const auto [dets, seconds] = per_frame_cost(agents, 20.0 * std::sqrt(agents / 100.0));
    log_n.push_back(std::log(dets));
    log_t.push_back(std::log(seconds));
    table += fmt("%s%.0f:%.0fus", table.empty() ? "" : " ", dets, seconds * 1e6);
  }
  const double k = slope(log_n, log_t);
  return {r.frames == 1000 && elapsed < 5.0 && k <= 2.0,
          fmt("100 agents x %zu frames in %.2f s; per-frame time vs detections [%s], log-log slope %.2f",
              r.frames, elapsed, table.c_str(), k)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"round-trip geometry", round_trip_geometry},
      {"ray/homography cross-oracle", ray_homography_cross_oracle},
      {"calibration from exact pairs", calibration_from_exact_pairs},
      {"noise-free end-to-end", noise_free_end_to_end},
      {"noisy end-to-end", noisy_end_to_end},
      {"orthographic crowding", orthographic_crowding},
      {"anchor laws", anchor_laws},
      {"skeleton scale compensation", skeleton_scale},
      {"tracker", tracker_checks},
      {"OSC golden vector", osc_golden_vector},
      {"throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
              criteria.size());
  return failures;
}
