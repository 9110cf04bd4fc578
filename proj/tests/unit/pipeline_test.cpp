#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "szloca/config.hpp"
#include "szloca/error.hpp"
#include "szloca/osc.hpp"
#include "szloca/pipeline.hpp"
#include "szloca/records.hpp"
#include "szloca/scenario.hpp"
#include "szloca/simulation.hpp"

namespace szloca {
namespace {

namespace fs = std::filesystem;

// Counts lines without keeping them.
class LineCounter : public std::streambuf {
 public:
  std::size_t lines = 0;

 protected:
  int_type overflow(int_type ch) override {
    if (ch == '\n') ++lines;
    return ch;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) {
      if (s[i] == '\n') ++lines;
    }
    return n;
  }
};

SimScene small_scene(int agents, double duration) {
  SimScene scene;
  scene.agent_count = agents;
  scene.duration_s = duration;
  scene.noise.pixel_noise_std = 0.0;
  scene.noise.joint_dropout_prob = 0.0;
  return scene;
}

std::vector<DetectionFrame> detection_frames(const SimScene& scene) {
  std::vector<DetectionFrame> out;
  for (const auto& truth : generate_truth(scene)) {
    out.push_back(to_detection_frame(truth, synthesize_detections(truth, scene.rig, scene.noise, scene.seed)));
  }
  return out;
}

std::size_t resident_bytes() {
  std::ifstream statm("/proc/self/statm");
  std::size_t size = 0;
  std::size_t resident = 0;
  statm >> size >> resident;
  return resident * static_cast<std::size_t>(sysconf(_SC_PAGESIZE));
}

TEST(Pipeline, FileModeKeepsEveryFrame) {
  auto frames = detection_frames(small_scene(4, 3.0));
  for (std::size_t i = 0; i < frames.size(); i += 7) frames[i].detections.clear();
  std::stringstream in;
  for (const auto& f : frames) in << serialize_detection_record(f) << "\n\n";

  Pipeline pipeline(PipelineConfig{});
  std::ostringstream out;
  const PipelineStats stats = run_file_pipeline(pipeline, in, FrameSinks{&out});
  EXPECT_EQ(stats.frames, frames.size());
  EXPECT_EQ(stats.records_written, frames.size());

  std::istringstream lines(out.str());
  std::string line;
  std::size_t k = 0;
  while (std::getline(lines, line)) {
    const TrackFrame tf = parse_track_record(line);
    ASSERT_LT(k, frames.size());
    EXPECT_EQ(tf.frame_index, frames[k].frame_index);
    ++k;
  }
  EXPECT_EQ(k, frames.size());
}

TEST(Pipeline, EmptyDetectionsAreLiftMisses) {
  Pipeline pipeline(PipelineConfig{});
  DetectionFrame f;
  f.detections.emplace_back();
  f.detections.emplace_back();
  pipeline.process(f);
  EXPECT_EQ(pipeline.stats().anchor_misses, 2u);
  EXPECT_EQ(pipeline.stats().lift_misses, 2u);
}

TEST(Pipeline, ErrorsCarryFrameIndex) {
  Pipeline pipeline(PipelineConfig{});
  DetectionFrame f;
  f.frame_index = 4;
  f.timestamp = 1.0;
  pipeline.process(f);
  f.frame_index = 5;
  f.timestamp = 0.5;
  try {
    pipeline.process(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameOrder);
    EXPECT_NE(std::string(e.what()).find("frame 5"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, SeededRunsAreByteIdentical) {
  SceneConfig cfg;
  cfg.scene = small_scene(5, 4.0);
  cfg.scene.noise.pixel_noise_std = 1.0;
  cfg.scene.noise.joint_dropout_prob = 0.1;
  cfg.pipeline.rig = cfg.scene.rig;
  std::ostringstream a;
  std::ostringstream b;
  run_scenario(cfg, ScenarioOutputs{nullptr, nullptr, &a});
  run_scenario(cfg, ScenarioOutputs{nullptr, nullptr, &b});
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Pipeline, UdpStreamDeliversEveryFrameInOrder) {
  const auto frames = detection_frames(small_scene(3, 4.0));
  ASSERT_EQ(frames.size(), 100u);

  UdpSocket inbound = UdpSocket::bind("127.0.0.1", 0);
  UdpSocket osc_listener = UdpSocket::bind("127.0.0.1", 0);
  const std::uint16_t in_port = inbound.local_port();
  OscEmitter emitter(Endpoint{"osc", "127.0.0.1", osc_listener.local_port()}, 4096);

  PipelineConfig cfg;
  cfg.tracker.n_init = 1;
  Pipeline pipeline(cfg);
  std::ostringstream out;
  StreamOptions options;
  options.max_frames = frames.size();
  options.idle_timeout = std::chrono::milliseconds(5000);

  std::vector<OscTrackMessage> received;
  std::jthread listener([&](std::stop_token stop) {
    while (!stop.stop_requested()) {
      if (auto datagram = osc_listener.receive(std::chrono::milliseconds(50))) {
        const std::vector<std::uint8_t> bytes(datagram->begin(), datagram->end());
        if (auto msg = decode_osc_track(bytes)) received.push_back(*msg);
      }
    }
  });

  PipelineStats stats;
  std::jthread runner([&](std::stop_token stop) {
    stats = run_stream_pipeline(pipeline, inbound, options, FrameSinks{&out, &emitter}, stop);
  });
  UdpSocket sender = UdpSocket::sender("127.0.0.1", in_port);
  for (const auto& f : frames) {
    const std::string line = serialize_detection_record(f) + "\n";
    ASSERT_TRUE(sender.send({reinterpret_cast<const std::uint8_t*>(line.data()), line.size()}));
    std::this_thread::sleep_for(std::chrono::microseconds(500));
  }
  runner.join();
  emitter.flush();
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  listener.request_stop();
  listener.join();

  EXPECT_EQ(stats.frames, frames.size());
  EXPECT_EQ(stats.records_written, frames.size());
  std::istringstream lines(out.str());
  std::string line;
  std::int64_t expected = 0;
  while (std::getline(lines, line)) EXPECT_EQ(parse_track_record(line).frame_index, expected++);
  EXPECT_EQ(expected, 100);

  EXPECT_GT(stats.osc_enqueued, 0u);
  EXPECT_EQ(stats.osc_dropped, 0u);
  for (const auto& msg : received) EXPECT_GE(msg.id, 1);
  EXPECT_EQ(received.size(), stats.osc_sent);
}

TEST(Pipeline, TrackerStateStaysBoundedOverLongRuns) {
  // Three agents loop around the view; one of them leaves and re-enters every
  // 400 frames so identities keep being created and retired.
  PipelineConfig cfg;
  cfg.tracker.n_init = 2;
  cfg.tracker.max_age = 10;
  Pipeline pipeline(cfg);
  LineCounter counter;
  std::ostream records(&counter);
  FrameSinks sinks{&records};
  PipelineStats io_stats;

  const CameraRig& rig = cfg.rig;
  const Vec3 lateral = AgentTemplate::lateral_axis_for(rig);
  constexpr std::int64_t kFrames = 100000;
  std::size_t rss_warm = 0;
  std::size_t max_state = 0;
  for (std::int64_t k = 0; k < kFrames; ++k) {
    const double t = static_cast<double>(k) / 25.0;
    TruthFrame truth;
    truth.frame_index = k;
    truth.timestamp = t;
    for (int i = 0; i < 3; ++i) {
      if (i == 2 && (k / 200) % 2 == 1) continue;
      const double phase = 0.2 * t + 2.1 * i;
      const Vec3 foot(6.0 * std::cos(phase), 0.0, -15.0 + 5.0 * std::sin(phase));
      TruthAgent a;
      a.id = i;
      a.height_m = 1.7;
      a.footprint = foot;
      a.joints = AgentTemplate::joints(foot, 1.7, lateral);
      truth.agents.push_back(std::move(a));
    }
    const DetectionFrame f = to_detection_frame(truth, synthesize_detections(truth, rig, NoiseModel{0.0, 0.0}, 1));
    deliver(pipeline.process(f), sinks, io_stats);
    max_state = std::max(max_state, pipeline.tracker().tracks().size());
    if (k == 10000) rss_warm = resident_bytes();
  }
  EXPECT_EQ(counter.lines, static_cast<std::size_t>(kFrames));
  EXPECT_LE(max_state, 3u);
  EXPECT_LE(pipeline.stats().peak_tracks, 3u);
  EXPECT_GT(pipeline.tracker().next_id(), 200u);
  const std::size_t rss_end = resident_bytes();
  EXPECT_LT(rss_end, rss_warm + 4 * 1024 * 1024) << rss_warm << " -> " << rss_end;
}

#if defined(SZLOCA_CLI_PATH)

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SZLOCA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("szloca_" + name + "_" + std::to_string(getpid()));
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, TiltedRigIsAConfigError) {
  if (std::string(SZLOCA_CLI_PATH).empty()) GTEST_SKIP() << "command line tool not built";
  const fs::path dir = scratch_dir("tilt");
  std::ofstream(dir / "d.jsonl") << R"({"frame":0,"t":0,"detections":[]})" << "\n";
  const std::string data = SZLOCA_TEST_DATA_DIR;
  EXPECT_EQ(run_cli("lift --config " + data + "/tilted_up_config.json --detections " +
                    (dir / "d.jsonl").string() + " --out " + (dir / "o.jsonl").string()),
            2);
  EXPECT_EQ(run_cli("lift --config " + data + "/pipeline_config.json --detections " +
                    (dir / "d.jsonl").string() + " --out " + (dir / "o.jsonl").string()),
            0);
  EXPECT_EQ(run_cli("lift --config " + data + "/pipeline_config.json --detections " +
                    (dir / "missing.jsonl").string() + " --out " + (dir / "o.jsonl").string()),
            3);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  fs::remove_all(dir);
}

TEST(Cli, SimulateThenLiftNoiseFree) {
  if (std::string(SZLOCA_CLI_PATH).empty()) GTEST_SKIP() << "command line tool not built";
  const fs::path dir = scratch_dir("sim");
  const std::string data = SZLOCA_TEST_DATA_DIR;
  const std::string scene_path = data + "/noise_free_scene.json";
  ASSERT_EQ(run_cli("simulate --scene " + scene_path + " --report " + (dir / "run.json").string()), 0);

  nlohmann::json report;
  std::ifstream(dir / "run.json") >> report;
  EXPECT_LT(report["metrics"]["mean_error_m"].get<double>(), 1e-3);
  ASSERT_TRUE(fs::exists(dir / "run.detections.jsonl"));

  ASSERT_EQ(run_cli("lift --config " + data + "/pipeline_config.json --detections " +
                    (dir / "run.detections.jsonl").string() + " --out " +
                    (dir / "lifted.jsonl").string()),
            0);
  std::vector<TrackFrame> outputs;
  std::ifstream lifted(dir / "lifted.jsonl");
  std::string line;
  while (std::getline(lifted, line)) outputs.push_back(parse_track_record(line));

  const SceneConfig scene = load_scene_config(scene_path);
  const auto truth = generate_truth(scene.scene);
  ASSERT_EQ(outputs.size(), truth.size());
  const Metrics m = evaluate(truth, outputs, scene.evaluation);
  EXPECT_LT(m.mean_error_m, 1e-3);
  EXPECT_EQ(m.missed, 0u);
  EXPECT_EQ(m.identity_switches, 0u);
  fs::remove_all(dir);
}

#endif

}  // namespace
}  // namespace szloca
