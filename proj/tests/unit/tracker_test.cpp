#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <sstream>

#include "szloca/error.hpp"
#include "szloca/scenario.hpp"
#include "szloca/tracking.hpp"

namespace szloca {
namespace {

LiftedDetection at(double x, double z) {
  LiftedDetection d;
  d.ground_point = Vec3(x, 0, z);
  return d;
}

TEST(Associate, SeparatedAndGated) {
  Tracker tracker(TrackerParams{.n_init = 1});
  const std::vector<LiftedDetection> seed = {at(0, 0), at(5, 0)};
  tracker.step(0, 0.0, seed);
  const std::vector<LiftedDetection> next = {at(5.1, 0), at(0.2, 0)};
  const auto a = associate(tracker.tracks(), next, 1.5);
  ASSERT_EQ(a.pairs.size(), 2u);
  EXPECT_EQ(a.pairs[0].second, 1u);
  EXPECT_EQ(a.pairs[1].second, 0u);

  const std::vector<LiftedDetection> far = {at(10, 10)};
  Tracker single(TrackerParams{.n_init = 1});
  const std::vector<LiftedDetection> origin = {at(0, 0)};
  single.step(0, 0.0, origin);
  const auto g = associate(single.tracks(), far, 1.5);
  EXPECT_TRUE(g.pairs.empty());
  EXPECT_EQ(g.unmatched_rows.size(), 1u);
  EXPECT_EQ(g.unmatched_cols.size(), 1u);
}

TEST(Tracker, ColdStartConfirmsImmediatelyWithNInitOne) {
  Tracker tracker(TrackerParams{.n_init = 1});
  const std::vector<LiftedDetection> dets = {at(0, -5), at(3, -8)};
  const auto out = tracker.step(0, 0.0, dets);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, 1u);
  EXPECT_EQ(out[1].id, 2u);
  EXPECT_EQ(out[0].lifecycle, TrackLifecycle::Confirmed);
}

TEST(Tracker, TentativeUntilNInitHits) {
  Tracker tracker(TrackerParams{.n_init = 3});
  const std::vector<LiftedDetection> dets = {at(0, -5)};
  EXPECT_TRUE(tracker.step(0, 0.00, dets).empty());
  EXPECT_TRUE(tracker.step(1, 0.04, dets).empty());
  EXPECT_EQ(tracker.step(2, 0.08, dets).size(), 1u);
}

TEST(Tracker, RemovalAfterMaxAgeAndNoIdReuse) {
  TrackerParams p;
  p.n_init = 1;
  p.max_age = 3;
  Tracker tracker(p);
  const std::vector<LiftedDetection> one = {at(0, -5)};
  const std::vector<LiftedDetection> none;
  tracker.step(0, 0.0, one);
  double t = 0.0;
  for (int k = 1; k <= p.max_age; ++k) {
    t += 0.1;
    EXPECT_TRUE(tracker.step(k, t, none).empty());
    ASSERT_EQ(tracker.tracks().size(), 1u);
    EXPECT_EQ(tracker.tracks()[0].lifecycle, TrackLifecycle::Lost);
  }
  tracker.step(p.max_age + 1, t + 0.1, none);
  EXPECT_TRUE(tracker.tracks().empty());
  const auto out = tracker.step(p.max_age + 2, t + 0.2, one);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 2u);
}

TEST(Tracker, LostTrackRecoversSameId) {
  Tracker tracker(TrackerParams{.n_init = 1});
  const std::vector<LiftedDetection> one = {at(0, -5)};
  const std::vector<LiftedDetection> none;
  tracker.step(0, 0.0, one);
  tracker.step(1, 0.1, none);
  const auto out = tracker.step(2, 0.2, one);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 1u);
  EXPECT_EQ(out[0].lifecycle, TrackLifecycle::Confirmed);
}

TEST(Tracker, RejectsNonIncreasingTimestamps) {
  Tracker tracker;
  tracker.step(0, 1.0, {});
  try {
    tracker.step(1, 1.0, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameOrder);
  }
}

TEST(Tracker, IdsStrictlyIncreaseAndCovarianceStaysPsd) {
  SceneConfig cfg;
  cfg.scene.agent_count = 15;
  cfg.scene.duration_s = 6.0;
  cfg.scene.seed = 5;
  Pipeline pipeline(cfg.pipeline);
  const auto truth = generate_truth(cfg.scene);
  TrackId last_seen = 0;
  for (const auto& frame : truth) {
    const auto dets = synthesize_detections(frame, cfg.scene.rig, cfg.scene.noise, cfg.scene.seed);
    pipeline.process(to_detection_frame(frame, dets));
    for (const auto& t : pipeline.tracker().tracks()) {
      const Eigen::SelfAdjointEigenSolver<Mat4> eig(t.kinematics.covariance);
      ASSERT_GE(eig.eigenvalues().minCoeff(), -1e-9);
    }
    EXPECT_GE(pipeline.tracker().next_id(), last_seen);
    for (std::size_t i = 1; i < pipeline.tracker().tracks().size(); ++i) {
      EXPECT_LT(pipeline.tracker().tracks()[i - 1].track_id, pipeline.tracker().tracks()[i].track_id);
    }
    last_seen = pipeline.tracker().next_id();
  }
}

SceneConfig crossing_scene() {
  SceneConfig cfg;
  cfg.scene.noise = {0.0, 0.0};
  cfg.scene.duration_s = 12.0;
  // Paths cross at (0, -15) one second apart.
  cfg.scene.agents = {AgentSpec{1.7, 1.0, {Vec2(-6, -15), Vec2(6, -15)}},
                      AgentSpec{1.6, 1.0, {Vec2(0, -22), Vec2(0, -8)}}};
  cfg.pipeline.tracker.n_init = 1;
  return cfg;
}

TEST(Tracker, CrossingAgentsKeepIdentities) {
  const ScenarioResult r = run_scenario(crossing_scene());
  EXPECT_EQ(r.metrics.identity_switches, 0u);
  EXPECT_EQ(r.metrics.missed, 0u);
  EXPECT_EQ(r.metrics.false_tracks, 0u);
}

TEST(Tracker, ByteIdenticalAcrossRuns) {
  SceneConfig cfg;
  cfg.scene.seed = 99;
  cfg.scene.duration_s = 4.0;
  std::ostringstream a, b;
  run_scenario(cfg, {nullptr, nullptr, &a});
  run_scenario(cfg, {nullptr, nullptr, &b});
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

}  // namespace
}  // namespace szloca
