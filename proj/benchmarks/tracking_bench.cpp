#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "szloca/assignment.hpp"
#include "szloca/pipeline.hpp"
#include "szloca/simulation.hpp"

namespace {

using namespace szloca;

void BM_HungarianDense(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HungarianDense)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_GatedAssignmentSparse(benchmark::State& state) {
  // Points spread so that each track only sees a few nearby detections.
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(6);
  const double side = 2.0 * std::sqrt(static_cast<double>(n));
  std::uniform_real_distribution<double> u(0.0, side);
  std::normal_distribution<double> jitter(0.0, 0.2);
  std::vector<Vec2> tracks(static_cast<std::size_t>(n)), dets(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    tracks[i] = Vec2(u(rng), u(rng));
    dets[i] = tracks[i] + Vec2(jitter(rng), jitter(rng));
  }
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) cost(r, c) = (tracks[r] - dets[c]).norm();
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_gated_assignment(cost, 1.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GatedAssignmentSparse)->RangeMultiplier(2)->Range(8, 512)->Complexity();

void BM_PipelineFrame(benchmark::State& state) {
  SimScene scene;
  scene.agent_count = static_cast<int>(state.range(0));
  scene.duration_s = 4.0;
  const auto truth = generate_truth(scene);
  std::vector<DetectionFrame> frames;
  for (const auto& t : truth) {
    frames.push_back(to_detection_frame(t, synthesize_detections(t, scene.rig, scene.noise, scene.seed)));
  }
  std::size_t detections = 0;
  for (auto _ : state) {
    state.PauseTiming();
    Pipeline pipeline{PipelineConfig{}};
    state.ResumeTiming();
    for (const auto& f : frames) {
      benchmark::DoNotOptimize(pipeline.process(f));
      detections += f.detections.size();
    }
  }
  state.counters["frames/s"] = benchmark::Counter(
      static_cast<double>(frames.size()) * static_cast<double>(state.iterations()),
      benchmark::Counter::kIsRate);
  state.counters["detections"] = benchmark::Counter(static_cast<double>(detections),
                                                    benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_PipelineFrame)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
