#include "szloca/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "szloca/error.hpp"

namespace szloca {
namespace {

using json = nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, path + ": " + what);
}

/// A JSON object with a fixed set of permitted keys.
class Block {
 public:
  Block(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_fail(path_, "must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.count(key)) config_fail(path_, "unknown key '" + key + "'");
    }
  }

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }
  [[nodiscard]] std::string sub(const char* key) const { return path_ + "." + key; }

  [[nodiscard]] const json& at(const char* key) const {
    if (!has(key)) config_fail(path_, std::string("missing key '") + key + "'");
    return j_.at(key);
  }

  [[nodiscard]] double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) config_fail(sub(key), "must be a number");
    return v.get<double>();
  }
  [[nodiscard]] double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  [[nodiscard]] std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) config_fail(sub(key), "must be an integer");
    return v.get<std::int64_t>();
  }

  [[nodiscard]] bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) config_fail(sub(key), "must be true or false");
    return v.get<bool>();
  }

  [[nodiscard]] std::string string(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) config_fail(sub(key), "must be a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::optional<std::string> opt_string(const char* key) const {
    if (!has(key)) return std::nullopt;
    return string(key);
  }

  [[nodiscard]] std::vector<std::string> strings(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) config_fail(sub(key), "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) config_fail(sub(key), "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  template <int N>
  [[nodiscard]] Eigen::Matrix<double, N, 1> vec(const char* key) const {
    return to_vec<N>(at(key), sub(key));
  }

  [[nodiscard]] Block child(const char* key, std::initializer_list<const char*> allowed) const {
    return Block(at(key), sub(key), allowed);
  }

  template <int N>
  static Eigen::Matrix<double, N, 1> to_vec(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      config_fail(path, "must be an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) config_fail(path, "must contain only numbers");
      out(i) = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

/// Runs a validation step, reporting failures as configuration errors under `path`.
template <typename F>
auto checked(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const ErrorCode code = e.code() == ErrorCode::TiltCheck ? ErrorCode::TiltCheck
                                                            : ErrorCode::InvalidConfig;
    throw Error(code, path + ": " + e.what());
  }
}

Mat3 parse_matrix3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) config_fail(path, "must be a 3x3 array of rows");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = Block::to_vec<3>(v[r], path).transpose();
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": malformed JSON: " + e.what());
  }
}

AnchorConfig parse_anchor(const Block& b) {
  AnchorConfig cfg;
  if (b.has("strategy")) {
    cfg.strategy = checked(b.sub("strategy"), [&] { return parse_anchor_strategy(b.string("strategy")); });
  }
  cfg.min_joint_confidence = b.number("min_joint_confidence", cfg.min_joint_confidence);
  if (b.has("fallback")) {
    cfg.fallback_chain.clear();
    for (const auto& name : b.strings("fallback")) {
      cfg.fallback_chain.push_back(checked(b.sub("fallback"), [&] { return parse_anchor_strategy(name); }));
    }
  }
  cfg.torso_height_m = b.number("torso_height_m", cfg.torso_height_m);
  checked(b.path(), [&] { cfg.validate(); });
  return cfg;
}

SkeletonLayout parse_skeleton(const Block& b) {
  if (b.has("layout")) {
    if (b.has("joints")) config_fail(b.path(), "give either 'layout' or 'joints', not both");
    const std::string name = b.string("layout");
    if (name != "coco17") config_fail(b.sub("layout"), "unknown layout '" + name + "'");
    return SkeletonLayout::coco17();
  }
  SkeletonLayout layout;
  layout.joint_names = b.strings("joints");
  layout.head = b.string("head");
  layout.feet = b.strings("feet");
  layout.torso = b.strings("torso");
  checked(b.path(), [&] { layout.validate(); });
  return layout;
}

SmootherConfig parse_smoother(const Block& b) {
  SmootherConfig cfg;
  if (b.has("kind")) {
    const std::string kind = b.string("kind");
    if (kind == "none") {
      cfg.kind = SmootherKind::None;
    } else if (kind == "ema") {
      cfg.kind = SmootherKind::Ema;
    } else if (kind == "one_euro") {
      cfg.kind = SmootherKind::OneEuro;
    } else {
      config_fail(b.sub("kind"), "must be none, ema, or one_euro");
    }
  }
  cfg.ema_alpha = b.number("ema_alpha", cfg.ema_alpha);
  cfg.one_euro.min_cutoff_hz = b.number("min_cutoff_hz", cfg.one_euro.min_cutoff_hz);
  cfg.one_euro.beta = b.number("beta", cfg.one_euro.beta);
  cfg.one_euro.d_cutoff_hz = b.number("d_cutoff_hz", cfg.one_euro.d_cutoff_hz);
  checked(b.path(), [&] { cfg.validate(); });
  return cfg;
}

TrackerParams parse_tracker(const Block& b) {
  TrackerParams p;
  p.n_init = static_cast<int>(b.integer("n_init", p.n_init));
  p.max_age = static_cast<int>(b.integer("max_age", p.max_age));
  p.gate_radius = b.number("gate_radius_m", p.gate_radius);
  p.process_accel_std = b.number("process_accel_std", p.process_accel_std);
  p.measurement_std = b.number("measurement_std", p.measurement_std);
  p.initial_velocity_std = b.number("initial_velocity_std", p.initial_velocity_std);
  if (b.has("smoother")) {
    p.smoother = parse_smoother(
        b.child("smoother", {"kind", "ema_alpha", "min_cutoff_hz", "beta", "d_cutoff_hz"}));
  }
  checked(b.path(), [&] { p.validate(); });
  return p;
}

IoConfig parse_io(const Block& b) {
  IoConfig io;
  io.input_path = b.opt_string("input");
  io.listen = b.opt_string("listen");
  io.output_path = b.opt_string("output");
  io.emit = b.opt_string("emit");
  const auto capacity = b.integer("emit_queue", static_cast<std::int64_t>(io.emit_queue_capacity));
  if (capacity < 1) config_fail(b.sub("emit_queue"), "must be >= 1");
  io.emit_queue_capacity = static_cast<std::size_t>(capacity);
  if (const auto pos = b.opt_string("emit_position")) {
    if (*pos == "raw") {
      io.emit_position = EmitPosition::Raw;
    } else if (*pos == "smoothed") {
      io.emit_position = EmitPosition::Smoothed;
    } else {
      config_fail(b.sub("emit_position"), "must be raw or smoothed");
    }
  }
  return io;
}

/// Blocks shared by pipeline and scene documents once rig and ground are known.
void parse_processing_blocks(const Block& root, const json& doc, PipelineConfig& cfg) {
  if (root.has("lift_method")) {
    const std::string method = root.string("lift_method");
    if (method == "ray") {
      cfg.lift_method = LiftMethod::Ray;
    } else if (method == "homography") {
      cfg.lift_method = LiftMethod::Homography;
    } else {
      config_fail(root.sub("lift_method"), "must be ray or homography");
    }
  }
  cfg.place_skeletons = root.boolean("place_skeletons", cfg.place_skeletons);
  if (root.has("skeleton")) {
    cfg.layout = parse_skeleton(root.child("skeleton", {"layout", "joints", "head", "feet", "torso"}));
  }
  if (root.has("anchor")) {
    cfg.anchor = parse_anchor(
        root.child("anchor", {"strategy", "min_joint_confidence", "fallback", "torso_height_m"}));
  }
  if (root.has("tracker")) {
    cfg.tracker = parse_tracker(root.child(
        "tracker", {"n_init", "max_age", "gate_radius_m", "process_accel_std", "measurement_std",
                    "initial_velocity_std", "smoother"}));
  }
  if (root.has("rig") && doc.at("rig").contains("homography")) {
    const auto* plane = std::get_if<GroundPlane>(&cfg.ground);
    if (plane == nullptr) config_fail("rig.homography", "requires a planar ground");
    cfg.homography = GroundHomography::normalized(
        parse_matrix3(doc.at("rig").at("homography"), "rig.homography"),
        PlaneFrame::from_plane(*plane));
  }
}

}  // namespace

void IoConfig::validate() const {
  const int sources = (input_path ? 1 : 0) + (listen ? 1 : 0);
  if (sources != 1) {
    throw Error(ErrorCode::InvalidConfig, "io: exactly one input source (file or listen) is required");
  }
  if (!output_path && !emit) {
    throw Error(ErrorCode::InvalidConfig, "io: at least one sink (output file or emit) is required");
  }
  if (emit_queue_capacity == 0) throw Error(ErrorCode::InvalidConfig, "io: emit_queue must be >= 1");
}

void PipelineConfig::validate() const {
  checked("anchor", [&] { anchor.validate(); });
  checked("skeleton", [&] { layout.validate(); });
  checked("tracker", [&] { tracker.validate(); });
  if (lift_method == LiftMethod::Homography) {
    if (!std::holds_alternative<GroundPlane>(ground)) {
      throw Error(ErrorCode::InvalidConfig, "lift_method homography requires a planar ground");
    }
    if (!homography && rig.projection() != Projection::Perspective) {
      throw Error(ErrorCode::InvalidConfig,
                  "lift_method homography needs a perspective rig or an explicit rig.homography");
    }
  }
}

CameraRig parse_rig(const json& doc) {
  const Block b(doc, "rig",
                {"projection", "image_size", "focal_px", "ortho_scale", "principal_point",
                 "position_m", "yaw_pitch_roll_deg", "rotation", "force_tilt", "homography"});
  const std::string projection = b.has("projection") ? b.string("projection") : "perspective";
  const Vec2 size = b.vec<2>("image_size");
  if (size.x() != std::floor(size.x()) || size.y() != std::floor(size.y())) {
    config_fail(b.sub("image_size"), "must be whole pixels");
  }
  std::optional<Vec2> principal;
  if (b.has("principal_point")) principal = b.vec<2>("principal_point");

  CameraIntrinsics intrinsics;
  if (projection == "perspective") {
    if (b.has("ortho_scale")) config_fail(b.path(), "ortho_scale is for orthographic rigs");
    intrinsics = CameraIntrinsics::perspective(static_cast<int>(size.x()),
                                               static_cast<int>(size.y()), b.number("focal_px"),
                                               principal);
  } else if (projection == "orthographic") {
    if (b.has("focal_px")) config_fail(b.path(), "focal_px is for perspective rigs");
    intrinsics = CameraIntrinsics::orthographic(static_cast<int>(size.x()),
                                                static_cast<int>(size.y()),
                                                b.number("ortho_scale"), principal);
  } else {
    config_fail(b.sub("projection"), "must be perspective or orthographic");
  }

  const Vec3 position = b.vec<3>("position_m");
  if (b.has("yaw_pitch_roll_deg") == b.has("rotation")) {
    config_fail(b.path(), "give exactly one of yaw_pitch_roll_deg or rotation");
  }
  RigOptions options;
  options.force = b.boolean("force_tilt", false);
  return checked("rig", [&] {
    CameraPose pose;
    if (b.has("yaw_pitch_roll_deg")) {
      const Vec3 ypr = b.vec<3>("yaw_pitch_roll_deg");
      pose = CameraPose::from_euler(position, ypr.x(), ypr.y(), ypr.z());
    } else {
      pose.position = position;
      pose.rotation = parse_matrix3(b.at("rotation"), b.sub("rotation"));
    }
    return CameraRig(intrinsics, pose, options);
  });
}

GroundModel parse_ground(const json& doc) {
  if (!doc.is_object()) config_fail("ground", "must be an object");
  const std::string kind = doc.value("kind", std::string("plane"));
  if (kind == "plane") {
    const Block b(doc, "ground", {"kind", "anchor", "normal", "height"});
    if (b.has("height") && b.has("anchor")) config_fail("ground", "give either height or anchor");
    const Vec3 anchor = b.has("anchor") ? Vec3(b.vec<3>("anchor"))
                                        : Vec3(0.0, b.number("height", 0.0), 0.0);
    const Vec3 normal = b.has("normal") ? Vec3(b.vec<3>("normal")) : Vec3(Vec3::UnitY());
    return checked("ground", [&] { return GroundModel(GroundPlane::create(anchor, normal)); });
  }
  if (kind == "heightfield") {
    const Block b(doc, "ground", {"kind", "origin", "cell_size", "rows"});
    const Vec2 origin = b.vec<2>("origin");
    const double cell = b.number("cell_size");
    const json& rows_json = b.at("rows");
    if (!rows_json.is_array()) config_fail(b.sub("rows"), "must be an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : rows_json) {
      if (!row.is_array()) config_fail(b.sub("rows"), "each row must be an array of numbers");
      std::vector<double> values;
      for (const auto& v : row) {
        if (!v.is_number()) config_fail(b.sub("rows"), "each row must be an array of numbers");
        values.push_back(v.get<double>());
      }
      rows.push_back(std::move(values));
    }
    return checked("ground", [&] { return GroundModel(Heightfield::from_rows(origin, cell, rows)); });
  }
  config_fail("ground.kind", "must be plane or heightfield");
}

json homography_to_json(const GroundHomography& h) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({h.matrix(r, 0), h.matrix(r, 1), h.matrix(r, 2)});
  return rows;
}

PipelineConfig parse_pipeline_config(const json& doc) {
  const Block root(doc, "config",
                   {"rig", "ground", "lift_method", "place_skeletons", "skeleton", "anchor",
                    "tracker", "io"});
  PipelineConfig cfg;
  if (root.has("rig")) cfg.rig = parse_rig(doc.at("rig"));
  if (root.has("ground")) cfg.ground = parse_ground(doc.at("ground"));
  parse_processing_blocks(root, doc, cfg);
  if (root.has("io")) {
    cfg.io = parse_io(root.child(
        "io", {"input", "listen", "output", "emit", "emit_queue", "emit_position"}));
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_json_file(path));
}

SceneConfig parse_scene_config(const json& doc) {
  const Block root(doc, "scene",
                   {"area_size_m", "area_center_xz", "agent_count", "height_range_m",
                    "speed_range_mps", "frame_rate_hz", "duration_s", "noise", "seed", "agents",
                    "rig", "ground", "lift_method", "place_skeletons", "skeleton", "anchor",
                    "tracker", "evaluation"});
  SceneConfig out;
  SimScene& s = out.scene;
  if (root.has("area_size_m")) s.area_size = root.vec<2>("area_size_m");
  if (root.has("area_center_xz")) s.area_center = root.vec<2>("area_center_xz");
  s.agent_count = static_cast<int>(root.integer("agent_count", s.agent_count));
  if (root.has("height_range_m")) {
    const Vec2 r = root.vec<2>("height_range_m");
    s.height_range = {r.x(), r.y()};
  }
  if (root.has("speed_range_mps")) {
    const Vec2 r = root.vec<2>("speed_range_mps");
    s.speed_range = {r.x(), r.y()};
  }
  s.frame_rate_hz = root.number("frame_rate_hz", s.frame_rate_hz);
  s.duration_s = root.number("duration_s", s.duration_s);
  if (root.has("noise")) {
    const Block n = root.child("noise", {"pixel_std", "dropout"});
    s.noise.pixel_noise_std = n.number("pixel_std", s.noise.pixel_noise_std);
    s.noise.joint_dropout_prob = n.number("dropout", s.noise.joint_dropout_prob);
  }
  const auto seed = root.integer("seed", static_cast<std::int64_t>(s.seed));
  if (seed < 0) config_fail(root.sub("seed"), "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  if (root.has("agents")) {
    const json& list = root.at("agents");
    if (!list.is_array()) config_fail(root.sub("agents"), "must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "scene.agents[" + std::to_string(i) + "]";
      const Block a(list[i], path, {"height_m", "speed_mps", "waypoints_xz"});
      AgentSpec spec;
      spec.height_m = a.number("height_m", spec.height_m);
      spec.speed_mps = a.number("speed_mps", spec.speed_mps);
      const json& wps = a.at("waypoints_xz");
      if (!wps.is_array()) config_fail(a.sub("waypoints_xz"), "must be an array of [x, z]");
      for (const auto& wp : wps) spec.waypoints_xz.push_back(Block::to_vec<2>(wp, a.sub("waypoints_xz")));
      s.agents.push_back(std::move(spec));
    }
  }
  if (root.has("rig")) s.rig = parse_rig(doc.at("rig"));
  if (root.has("ground")) s.ground = parse_ground(doc.at("ground"));
  checked("scene", [&] { s.validate(); });

  out.pipeline.rig = s.rig;
  out.pipeline.ground = s.ground;
  parse_processing_blocks(root, doc, out.pipeline);
  out.pipeline.validate();

  if (root.has("evaluation")) {
    const Block e = root.child("evaluation", {"matching_radius_m", "bucket_width_m", "use_smoothed"});
    out.evaluation.matching_radius_m = e.number("matching_radius_m", out.evaluation.matching_radius_m);
    out.evaluation.bucket_width_m = e.number("bucket_width_m", out.evaluation.bucket_width_m);
    out.evaluation.use_smoothed = e.boolean("use_smoothed", out.evaluation.use_smoothed);
    if (!(out.evaluation.matching_radius_m > 0.0) || !(out.evaluation.bucket_width_m > 0.0)) {
      config_fail("scene.evaluation", "radius and bucket width must be positive");
    }
  }
  out.evaluation.reference_point = s.rig.position();
  return out;
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
  return parse_scene_config(read_json_file(path));
}

}  // namespace szloca
