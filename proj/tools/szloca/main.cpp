#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stop_token>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "szloca/config.hpp"
#include "szloca/error.hpp"
#include "szloca/lifting.hpp"
#include "szloca/pipeline.hpp"
#include "szloca/scenario.hpp"
#include "szloca/udp.hpp"

namespace {

using namespace szloca;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStream = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("szloca");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SZLOCA_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("ignoring unknown SZLOCA_LOG level '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::InvalidConfig || code == ErrorCode::TiltCheck ||
         code == ErrorCode::InvalidAngle;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  return out;
}

void log_stats(const PipelineStats& s) {
  spdlog::info(
      "frames={} detections={} lift_misses={} anchor_misses={} outside_image_anchors={} "
      "active_tracks={} records={} osc_sent={} osc_dropped={}",
      s.frames, s.detections, s.lift_misses, s.anchor_misses, s.outside_image_anchors,
      s.active_tracks, s.records_written, s.osc_sent, s.osc_dropped);
}

/// Blocks SIGINT/SIGTERM in every thread and turns them into a stop request.
class SignalStop {
 public:
  SignalStop() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    waiter_ = std::jthread([this](std::stop_token own) {
      const timespec tick{0, 100'000'000};
      while (!own.stop_requested()) {
        if (sigtimedwait(&set_, nullptr, &tick) > 0) {
          spdlog::info("interrupt received, finishing");
          source_.request_stop();
          return;
        }
      }
    });
  }

  [[nodiscard]] std::stop_token token() const { return source_.get_token(); }

 private:
  sigset_t set_{};
  std::stop_source source_;
  std::jthread waiter_;
};

struct LiftArgs {
  std::string config;
  std::string detections;
  std::string out;
  std::string emit;
};

int run_lift(const LiftArgs& args) {
  PipelineConfig cfg = load_pipeline_config(args.config);
  if (!args.detections.empty()) cfg.io.input_path = args.detections;
  if (!args.out.empty()) cfg.io.output_path = args.out;
  if (!args.emit.empty()) cfg.io.emit = args.emit;
  cfg.io.listen.reset();
  cfg.io.validate();

  std::ifstream in(*cfg.io.input_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open detections " + *cfg.io.input_path);
  std::optional<std::ofstream> out;
  FrameSinks sinks;
  sinks.emit_position = cfg.io.emit_position;
  if (cfg.io.output_path) {
    if (*cfg.io.output_path == "-") {
      sinks.records = &std::cout;
    } else {
      out = open_output(*cfg.io.output_path);
      sinks.records = &*out;
    }
  }
  std::optional<OscEmitter> emitter;
  if (cfg.io.emit) {
    emitter.emplace(Endpoint::parse(*cfg.io.emit, "osc"), cfg.io.emit_queue_capacity);
    sinks.emitter = &*emitter;
  }

  Pipeline pipeline(cfg);
  spdlog::debug("lifting {} with the {} anchor", *cfg.io.input_path,
                to_string(cfg.anchor.strategy));
  log_stats(run_file_pipeline(pipeline, in, sinks));
  return kExitOk;
}

struct StreamArgs {
  std::string config;
  std::string listen;
  std::string emit;
  std::string out;
  std::size_t max_frames = 0;
  int idle_timeout_ms = 0;
};

int run_stream(const StreamArgs& args, std::stop_token stop) {
  PipelineConfig cfg = load_pipeline_config(args.config);
  if (!args.listen.empty()) cfg.io.listen = args.listen;
  if (!args.emit.empty()) cfg.io.emit = args.emit;
  if (!args.out.empty()) cfg.io.output_path = args.out;
  cfg.io.input_path.reset();
  cfg.io.validate();

  const Endpoint listen = Endpoint::parse(*cfg.io.listen, "udp");
  std::optional<OscEmitter> emitter;
  FrameSinks sinks;
  sinks.emit_position = cfg.io.emit_position;
  if (cfg.io.emit) {
    emitter.emplace(Endpoint::parse(*cfg.io.emit, "osc"), cfg.io.emit_queue_capacity);
    sinks.emitter = &*emitter;
  }
  std::optional<std::ofstream> out;
  if (cfg.io.output_path) {
    if (*cfg.io.output_path == "-") {
      sinks.records = &std::cout;
    } else {
      out = open_output(*cfg.io.output_path);
      sinks.records = &*out;
    }
  }

  Pipeline pipeline(cfg);
  UdpSocket socket = UdpSocket::bind(listen.host, listen.port);
  spdlog::info("listening on udp://{}:{}", listen.host, socket.local_port());

  StreamOptions options;
  if (args.max_frames > 0) options.max_frames = args.max_frames;
  if (args.idle_timeout_ms > 0) options.idle_timeout = std::chrono::milliseconds(args.idle_timeout_ms);
  log_stats(run_stream_pipeline(pipeline, socket, options, sinks, stop));
  return kExitOk;
}

struct SimulateArgs {
  std::string scene;
  std::optional<std::uint64_t> seed;
  std::string report;
};

int run_simulate(const SimulateArgs& args) {
  SceneConfig cfg = load_scene_config(args.scene);
  if (args.seed) cfg.scene.seed = *args.seed;

  const fs::path report_path(args.report);
  const fs::path dir = report_path.parent_path();
  const std::string stem = report_path.stem().string();
  auto truth = open_output(dir / (stem + ".truth.jsonl"));
  auto detections = open_output(dir / (stem + ".detections.jsonl"));
  auto tracks = open_output(dir / (stem + ".tracks.jsonl"));

  const ScenarioResult result = run_scenario(cfg, {&truth, &detections, &tracks});
  auto report = open_output(report_path);
  report << scenario_report(cfg, result).dump(2) << '\n';
  if (!report) throw Error(ErrorCode::Io, "failed to write " + report_path.string());

  const Metrics& m = result.metrics;
  spdlog::info("frames={} agents={} mean_error_m={:.6f} miss_rate={:.4f} identity_switches={}",
               result.frames, result.agents, m.mean_error_m, m.miss_rate, m.identity_switches);
  log_stats(result.stats);
  return kExitOk;
}

std::vector<CorrespondencePair> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open pairs file " + path.string());
  std::vector<CorrespondencePair> pairs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    CorrespondencePair p;
    std::string extra;
    if (!(fields >> p.pixel.x() >> p.pixel.y() >> p.plane.x() >> p.plane.y()) || (fields >> extra)) {
      throw Error(ErrorCode::Parse,
                  path.string() + ":" + std::to_string(number) + ": expected 'u v a b'");
    }
    pairs.push_back(p);
  }
  return pairs;
}

int run_calibrate(const std::string& pairs_path, const std::string& config_path) {
  const PipelineConfig cfg = load_pipeline_config(config_path);
  const auto* plane = std::get_if<GroundPlane>(&cfg.ground);
  if (plane == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "calibration needs a planar ground in the config");
  }
  const auto pairs = read_pairs(pairs_path);
  const HomographyFit fit = fit_ground_homography(pairs, PlaneFrame::from_plane(*plane));

  nlohmann::json out = {{"homography", homography_to_json(fit.homography)},
                        {"pairs", pairs.size()},
                        {"rms_residual_m", fit.rms_residual_m},
                        {"max_residual_m", fit.max_residual_m},
                        {"condition", fit.condition}};
  if (cfg.rig.projection() == Projection::Perspective) {
    double worst = 0.0;
    for (const auto& p : pairs) {
      const auto via_fit = lift_via_homography(fit.homography, p.pixel);
      const auto via_rig = intersect_plane(screen_to_ray(cfg.rig, p.pixel).ray, *plane);
      if (via_fit && via_rig) worst = std::max(worst, (*via_fit - *via_rig).norm());
    }
    out["max_rig_disagreement_m"] = worst;
  }
  std::cout << out.dump(2) << '\n';
  spdlog::info("fitted {} pairs, rms residual {:.6f} m", pairs.size(), fit.rms_residual_m);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Ground-plane localization and tracking of people seen by a fixed camera"};
  app.require_subcommand(1);

  LiftArgs lift;
  auto* lift_cmd = app.add_subcommand("lift", "Lift a detection file into track records");
  lift_cmd->add_option("--config", lift.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  lift_cmd->add_option("--detections", lift.detections, "Detection records (JSONL)");
  lift_cmd->add_option("--out", lift.out, "Track records output, '-' for stdout");
  lift_cmd->add_option("--emit", lift.emit, "Also send OSC to osc://HOST:PORT");

  StreamArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "Lift detections arriving over UDP");
  stream_cmd->add_option("--config", stream.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  stream_cmd->add_option("--listen", stream.listen, "udp://HOST:PORT to receive detection records");
  stream_cmd->add_option("--emit", stream.emit, "osc://HOST:PORT to send tracks to");
  stream_cmd->add_option("--out", stream.out, "Also write track records, '-' for stdout");
  stream_cmd->add_option("--max-frames", stream.max_frames, "Stop after this many frames");
  stream_cmd->add_option("--idle-timeout-ms", stream.idle_timeout_ms,
                         "Stop after this long without input once frames have arrived");

  SimulateArgs simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a synthetic scene and score the tracker");
  sim_cmd->add_option("--scene", simulate.scene, "Scene config (JSON)")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", simulate.seed, "Override the scene seed");
  sim_cmd->add_option("--report", simulate.report, "Metrics report path; JSONL files go alongside")
      ->required();

  std::string pairs_path;
  std::string calib_config;
  auto* calib_cmd = app.add_subcommand("calibrate", "Fit a pixel-to-ground homography");
  calib_cmd->add_option("--pairs", pairs_path, "Lines of 'u v a b'")->required()->check(CLI::ExistingFile);
  calib_cmd->add_option("--config", calib_config, "Pipeline config giving the ground plane")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*lift_cmd) return run_lift(lift);
    if (*stream_cmd) {
      SignalStop signals;
      return run_stream(stream, signals.token());
    }
    if (*sim_cmd) return run_simulate(simulate);
    if (*calib_cmd) return run_calibrate(pairs_path, calib_config);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return is_config_error(e.code()) ? kExitConfig : kExitStream;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitStream;
  }
  return kExitOk;
}
