#include "szloca/records.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "szloca/error.hpp"

namespace szloca {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::Parse, what);
}

double number(const ojson& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string("expected a number for ") + what);
  return j.get<double>();
}

template <std::size_t N>
std::array<double, N> number_array(const ojson& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    parse_fail(std::string("expected an array of ") + std::to_string(N) + " numbers for " + what);
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = number(j[i], what);
  return out;
}

ojson parse_json(std::string_view line) {
  try {
    return ojson::parse(line.begin(), line.end());
  } catch (const ojson::parse_error& e) {
    parse_fail(std::string("malformed JSON: ") + e.what());
  }
}

const ojson& member(const ojson& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

void append_vec(std::string& out, std::initializer_list<double> values) {
  out += '[';
  bool first = true;
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::Serialization, "refusing to serialize a non-finite value");
    }
    if (!first) out += ',';
    out += format_fixed6(v);
    first = false;
  }
  out += ']';
}

void append_joints(std::string& out, const std::vector<PlacedJoint>& joints) {
  out += '{';
  bool first = true;
  for (const auto& j : joints) {
    if (!j.present) continue;
    if (!first) out += ',';
    out += ojson(j.name).dump();
    out += ':';
    append_vec(out, {j.position.x(), j.position.y(), j.position.z()});
    first = false;
  }
  out += '}';
}

TrackLifecycle parse_lifecycle(const std::string& s) {
  if (s == "confirmed") return TrackLifecycle::Confirmed;
  if (s == "tentative") return TrackLifecycle::Tentative;
  if (s == "lost") return TrackLifecycle::Lost;
  parse_fail("unknown track state '" + s + "'");
}

}  // namespace

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s(buf);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

DetectionFrame parse_detection_record(std::string_view line) {
  const ojson j = parse_json(line);
  if (!j.is_object()) parse_fail("record must be a JSON object");
  const ojson& frame = member(j, "frame");
  if (!frame.is_number_integer()) parse_fail("'frame' must be an integer");

  DetectionFrame out;
  out.frame_index = frame.get<std::int64_t>();
  out.timestamp = number(member(j, "t"), "'t'");
  if (!std::isfinite(out.timestamp)) parse_fail("'t' must be finite");
  const ojson& dets = member(j, "detections");
  if (!dets.is_array()) parse_fail("'detections' must be an array");

  for (const auto& d : dets) {
    if (!d.is_object()) parse_fail("each detection must be an object");
    Detection2D det;
    if (const auto kp = d.find("kp"); kp != d.end()) {
      if (!kp->is_object()) parse_fail("'kp' must be an object");
      for (const auto& [name, value] : kp->items()) {
        const auto uvc = number_array<3>(value, "keypoint");
        det.keypoints.push_back(Keypoint{name, Vec2(uvc[0], uvc[1]), uvc[2], true});
      }
    }
    if (const auto bbox = d.find("bbox"); bbox != d.end() && !bbox->is_null()) {
      const auto b = number_array<4>(*bbox, "'bbox'");
      det.bbox = BoundingBox{b[0], b[1], b[2], b[3]};
    }
    if (const auto conf = d.find("conf"); conf != d.end()) {
      det.confidence = number(*conf, "'conf'");
    }
    try {
      det.validate();
    } catch (const Error& e) {
      parse_fail(e.what());
    }
    out.detections.push_back(std::move(det));
  }
  return out;
}

std::string serialize_detection_record(const DetectionFrame& frame) {
  ojson j;
  j["frame"] = frame.frame_index;
  j["t"] = frame.timestamp;
  j["detections"] = ojson::array();
  for (const auto& det : frame.detections) {
    ojson d = ojson::object();
    if (det.bbox) {
      d["bbox"] = {det.bbox->u_min, det.bbox->v_min, det.bbox->width, det.bbox->height};
    }
    d["kp"] = ojson::object();
    for (const auto& kp : det.keypoints) {
      if (!kp.present) continue;
      d["kp"][kp.name] = {kp.pixel.x(), kp.pixel.y(), kp.confidence};
    }
    d["conf"] = det.confidence;
    j["detections"].push_back(std::move(d));
  }
  return j.dump();
}

std::optional<DetectionFrame> DetectionStreamReader::next() {
  std::string line;
  while (in_ != nullptr && std::getline(*in_, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      ++line_;
      continue;
    }
    return accept(line);
  }
  return std::nullopt;
}

DetectionFrame DetectionStreamReader::accept(std::string_view line) {
  ++line_;
  DetectionFrame frame;
  try {
    frame = parse_detection_record(line);
  } catch (const Error& e) {
    throw Error(e.code(), "line " + std::to_string(line_) + ": " + e.what());
  }
  if (last_frame_ && frame.frame_index <= *last_frame_) {
    throw Error(ErrorCode::FrameOrder, "line " + std::to_string(line_) + ": frame " +
                                           std::to_string(frame.frame_index) +
                                           " does not follow frame " + std::to_string(*last_frame_));
  }
  if (last_t_ && !(frame.timestamp > *last_t_)) {
    throw Error(ErrorCode::FrameOrder,
                "line " + std::to_string(line_) + ": timestamp does not increase");
  }
  last_frame_ = frame.frame_index;
  last_t_ = frame.timestamp;
  return frame;
}

std::string serialize_track_record(const TrackFrame& frame) {
  if (!std::isfinite(frame.timestamp)) {
    throw Error(ErrorCode::Serialization, "refusing to serialize a non-finite timestamp");
  }
  std::string out;
  out.reserve(64 + frame.tracks.size() * 160);
  out += "{\"frame\":";
  out += std::to_string(frame.frame_index);
  out += ",\"t\":";
  out += format_fixed6(frame.timestamp);
  out += ",\"tracks\":[";
  for (std::size_t i = 0; i < frame.tracks.size(); ++i) {
    const Track3D& t = frame.tracks[i];
    if (i > 0) out += ',';
    out += "{\"id\":";
    out += std::to_string(t.id);
    out += ",\"pos\":";
    append_vec(out, {t.position.x(), t.position.y(), t.position.z()});
    out += ",\"smoothed\":";
    append_vec(out, {t.smoothed.x(), t.smoothed.y(), t.smoothed.z()});
    out += ",\"vel\":";
    append_vec(out, {t.velocity.x(), t.velocity.y()});
    if (t.skeleton) {
      out += ",\"skeleton\":";
      append_joints(out, *t.skeleton);
    }
    out += ",\"state\":\"";
    out += to_string(t.lifecycle);
    out += "\"}";
  }
  out += "]}";
  return out;
}

TrackFrame parse_track_record(std::string_view line) {
  const ojson j = parse_json(line);
  if (!j.is_object()) parse_fail("record must be a JSON object");
  const ojson& frame = member(j, "frame");
  if (!frame.is_number_integer()) parse_fail("'frame' must be an integer");
  TrackFrame out;
  out.frame_index = frame.get<std::int64_t>();
  out.timestamp = number(member(j, "t"), "'t'");
  const ojson& tracks = member(j, "tracks");
  if (!tracks.is_array()) parse_fail("'tracks' must be an array");
  for (const auto& tj : tracks) {
    Track3D t;
    const ojson& id = member(tj, "id");
    if (!id.is_number_unsigned()) parse_fail("'id' must be a positive integer");
    t.id = id.get<TrackId>();
    const auto pos = number_array<3>(member(tj, "pos"), "'pos'");
    const auto smoothed = number_array<3>(member(tj, "smoothed"), "'smoothed'");
    const auto vel = number_array<2>(member(tj, "vel"), "'vel'");
    t.position = Vec3(pos[0], pos[1], pos[2]);
    t.smoothed = Vec3(smoothed[0], smoothed[1], smoothed[2]);
    t.velocity = Vec2(vel[0], vel[1]);
    if (const auto sk = tj.find("skeleton"); sk != tj.end()) {
      if (!sk->is_object()) parse_fail("'skeleton' must be an object");
      std::vector<PlacedJoint> joints;
      for (const auto& [name, value] : sk->items()) {
        const auto p = number_array<3>(value, "skeleton joint");
        joints.push_back(PlacedJoint{name, Vec3(p[0], p[1], p[2]), true});
      }
      t.skeleton = std::move(joints);
    }
    const ojson& state = member(tj, "state");
    if (!state.is_string()) parse_fail("'state' must be a string");
    t.lifecycle = parse_lifecycle(state.get<std::string>());
    out.tracks.push_back(std::move(t));
  }
  return out;
}

std::string serialize_truth_record(const TruthFrame& frame) {
  std::string out = "{\"frame\":" + std::to_string(frame.frame_index) +
                    ",\"t\":" + format_fixed6(frame.timestamp) + ",\"agents\":[";
  for (std::size_t i = 0; i < frame.agents.size(); ++i) {
    const TruthAgent& a = frame.agents[i];
    if (i > 0) out += ',';
    out += "{\"id\":" + std::to_string(a.id) + ",\"height\":" + format_fixed6(a.height_m) +
           ",\"footprint\":";
    append_vec(out, {a.footprint.x(), a.footprint.y(), a.footprint.z()});
    out += ",\"in_view\":";
    out += a.in_view ? "true" : "false";
    out += ",\"joints\":{";
    for (std::size_t k = 0; k < a.joints.size(); ++k) {
      if (k > 0) out += ',';
      out += ojson(a.joints[k].name).dump() + ':';
      const Vec3& p = a.joints[k].position;
      append_vec(out, {p.x(), p.y(), p.z()});
    }
    out += "}}";
  }
  out += "]}";
  return out;
}

}  // namespace szloca
