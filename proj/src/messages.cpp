// Copyright 2026 The uwtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uwtwin/messages.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "uwtwin/base64.hpp"

namespace uwtwin {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MsgType, std::string_view>, 7> kTypeNames{{
    {MsgType::PointCloud, "POINTCLOUD"},
    {MsgType::Image, "IMAGE"},
    {MsgType::Pose, "POSE"},
    {MsgType::Wrench, "WRENCH"},
    {MsgType::Path, "PATH"},
    {MsgType::PlanRequest, "PLAN_REQUEST"},
    {MsgType::Status, "STATUS"},
}};

// Thrown inside payload parsing, converted to DecodeError with an offset.
struct SchemaError {
  std::string what;
};

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw EncodeError(std::string("non-finite value in field '") + field + "'");
}

json vec_json(const Vec3& v, const char* field) {
  require_finite(v.x(), field);
  require_finite(v.y(), field);
  require_finite(v.z(), field);
  return json::array({v.x(), v.y(), v.z()});
}

const json& member(const json& j, const char* key) {
  if (!j.is_object()) throw SchemaError{"payload is not an object"};
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError{std::string("missing field '") + key + "'"};
  return *it;
}

double number(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number()) throw SchemaError{std::string("field '") + key + "' is not a number"};
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw SchemaError{std::string("field '") + key + "' is not a non-negative integer"};
  }
  return v.get<std::uint64_t>();
}

std::int64_t signed_int(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number_integer()) throw SchemaError{std::string("field '") + key + "' is not an integer"};
  return v.get<std::int64_t>();
}

std::string string_field(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_string()) throw SchemaError{std::string("field '") + key + "' is not a string"};
  return v.get<std::string>();
}

Vec3 vec_from(const json& v, const char* key) {
  if (!v.is_array() || v.size() != 3) throw SchemaError{std::string("field '") + key + "' is not a 3-vector"};
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw SchemaError{std::string("field '") + key + "' has a non-number"};
    out[i] = v[i].get<double>();
  }
  return out;
}

Vec3 vec_field(const json& j, const char* key) { return vec_from(member(j, key), key); }

std::vector<std::uint8_t> blob_field(const json& j, const char* key) {
  auto bytes = base64::decode(string_field(j, key));
  if (!bytes) throw SchemaError{std::string("field '") + key + "' is not valid base64"};
  return std::move(*bytes);
}

std::vector<std::uint8_t> pack_points(const std::vector<Point3f>& points) {
  std::vector<std::uint8_t> out(points.size() * 12);
  std::size_t o = 0;
  for (const auto& p : points) {
    for (float f : {p.x, p.y, p.z}) {
      if (!std::isfinite(f)) throw EncodeError("non-finite point in cloud");
      const auto bits = std::bit_cast<std::uint32_t>(f);
      out[o++] = static_cast<std::uint8_t>(bits);
      out[o++] = static_cast<std::uint8_t>(bits >> 8);
      out[o++] = static_cast<std::uint8_t>(bits >> 16);
      out[o++] = static_cast<std::uint8_t>(bits >> 24);
    }
  }
  return out;
}

std::vector<Point3f> unpack_points(const std::vector<std::uint8_t>& bytes, std::size_t n) {
  if (bytes.size() != n * 12) throw SchemaError{"point data length does not match n"};
  std::vector<Point3f> out(n);
  auto read = [&](std::size_t o) {
    const std::uint32_t bits = bytes[o] | (bytes[o + 1] << 8) | (bytes[o + 2] << 16) |
                               (static_cast<std::uint32_t>(bytes[o + 3]) << 24);
    return std::bit_cast<float>(bits);
  };
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {read(i * 12), read(i * 12 + 4), read(i * 12 + 8)};
  }
  return out;
}

json to_json(const PointCloud& c) {
  const auto packed = pack_points(c.points);
  return {{"n", c.points.size()}, {"data", base64::encode(packed)}, {"stamp_ns", c.stamp.nanos},
          {"seq", c.seq}};
}

json to_json(const ImageFrame& img) {
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw EncodeError("image data length does not match width*height");
  }
  return {{"width", img.width}, {"height", img.height}, {"encoding", "GRAY8"},
          {"data", base64::encode(img.data)}, {"stamp_ns", img.stamp.nanos}};
}

json to_json(const Pose& p) {
  const Quat& q = p.orientation;
  for (double c : {q.w(), q.x(), q.y(), q.z()}) require_finite(c, "orientation");
  return {{"position", vec_json(p.position, "position")},
          {"orientation", json::array({q.w(), q.x(), q.y(), q.z()})},
          {"stamp_ns", p.stamp.nanos},
          {"frame", p.frame}};
}

json to_json(const Wrench& w) {
  return {{"force", vec_json(w.force, "force")}, {"torque", vec_json(w.torque, "torque")},
          {"stamp_ns", w.stamp.nanos}};
}

json to_json(const Path& p) {
  json wps = json::array();
  for (const auto& w : p.waypoints) wps.push_back(vec_json(w, "waypoints"));
  require_finite(p.cost, "cost");
  require_finite(p.elapsed, "elapsed_s");
  return {{"waypoints", std::move(wps)}, {"cost", p.cost},
          {"planner", to_string(p.planner_id)}, {"iterations", p.iterations},
          {"elapsed_s", p.elapsed}, {"request_id", p.request_id}};
}

json to_json(const PlanRequest& r) {
  for (double v : {r.robot_radius, r.time_budget, r.goal_tolerance}) require_finite(v, "plan_request");
  return {{"start", vec_json(r.start, "start")},
          {"goal", vec_json(r.goal, "goal")},
          {"robot_radius", r.robot_radius},
          {"time_budget", r.time_budget},
          {"goal_tolerance", r.goal_tolerance},
          {"bounds", {{"min", vec_json(r.bounds.min, "bounds")}, {"max", vec_json(r.bounds.max, "bounds")}}},
          {"rng_seed", r.rng_seed},
          {"request_id", r.request_id}};
}

json to_json(const Status& s) {
  if (!s.body.is_object()) throw EncodeError("status body must be a JSON object");
  return s.body;
}

PointCloud cloud_from(const json& j) {
  PointCloud c;
  const auto n = unsigned_int(j, "n");
  c.points = unpack_points(blob_field(j, "data"), n);
  c.stamp = Timestamp{signed_int(j, "stamp_ns")};
  c.seq = unsigned_int(j, "seq");
  return c;
}

ImageFrame image_from(const json& j) {
  ImageFrame img;
  img.width = static_cast<std::uint32_t>(unsigned_int(j, "width"));
  img.height = static_cast<std::uint32_t>(unsigned_int(j, "height"));
  if (string_field(j, "encoding") != "GRAY8") throw SchemaError{"unsupported image encoding"};
  img.data = blob_field(j, "data");
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw SchemaError{"image data length does not match width*height"};
  }
  img.stamp = Timestamp{signed_int(j, "stamp_ns")};
  return img;
}

Pose pose_from(const json& j) {
  Pose p;
  p.position = vec_field(j, "position");
  const json& q = member(j, "orientation");
  if (!q.is_array() || q.size() != 4) throw SchemaError{"orientation is not a 4-vector"};
  for (const auto& c : q) {
    if (!c.is_number()) throw SchemaError{"orientation has a non-number"};
  }
  p.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  p.stamp = Timestamp{signed_int(j, "stamp_ns")};
  p.frame = string_field(j, "frame");
  return p;
}

Wrench wrench_from(const json& j) {
  Wrench w;
  w.force = vec_field(j, "force");
  w.torque = vec_field(j, "torque");
  w.stamp = Timestamp{signed_int(j, "stamp_ns")};
  return w;
}

Path path_from(const json& j) {
  Path p;
  const json& wps = member(j, "waypoints");
  if (!wps.is_array()) throw SchemaError{"waypoints is not an array"};
  for (const auto& w : wps) p.waypoints.push_back(vec_from(w, "waypoints"));
  p.cost = number(j, "cost");
  const auto planner = string_field(j, "planner");
  if (planner == "RRT") {
    p.planner_id = PlannerId::Rrt;
  } else if (planner == "RRT_STAR") {
    p.planner_id = PlannerId::RrtStar;
  } else {
    throw SchemaError{"unknown planner id"};
  }
  p.iterations = unsigned_int(j, "iterations");
  p.elapsed = number(j, "elapsed_s");
  p.request_id = unsigned_int(j, "request_id");
  return p;
}

PlanRequest plan_request_from(const json& j) {
  PlanRequest r;
  r.start = vec_field(j, "start");
  r.goal = vec_field(j, "goal");
  r.robot_radius = number(j, "robot_radius");
  r.time_budget = number(j, "time_budget");
  r.goal_tolerance = number(j, "goal_tolerance");
  const json& b = member(j, "bounds");
  r.bounds.min = vec_field(b, "min");
  r.bounds.max = vec_field(b, "max");
  r.rng_seed = unsigned_int(j, "rng_seed");
  r.request_id = unsigned_int(j, "request_id");
  return r;
}

void put_length(std::string& out, std::uint32_t n) {
  out.push_back(static_cast<char>(n & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
}

std::uint32_t read_length(std::span<const std::uint8_t> b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

Envelope envelope_from_body(std::span<const std::uint8_t> body, std::size_t base_offset) {
  json j;
  try {
    j = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports a 1-based position of the offending byte.
    const std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
    throw DecodeError(std::string("malformed JSON: ") + e.what(), base_offset + pos);
  }
  try {
    return envelope_from_json(j);
  } catch (const DecodeError& e) {
    throw DecodeError(e.what(), base_offset);
  }
}

}  // namespace

std::string_view to_string(MsgType t) {
  for (const auto& [type, name] : kTypeNames) {
    if (type == t) return name;
  }
  return "UNKNOWN";
}

std::optional<MsgType> msg_type_from_string(std::string_view s) {
  for (const auto& [type, name] : kTypeNames) {
    if (name == s) return type;
  }
  return std::nullopt;
}

std::string_view to_string(PlannerId id) { return id == PlannerId::Rrt ? "RRT" : "RRT_STAR"; }

Wrench Wrench::clamped(const WrenchLimits& lim) const {
  Wrench out = *this;
  out.force = force.cwiseMax(-lim.max_force).cwiseMin(lim.max_force);
  out.torque = torque.cwiseMax(-lim.max_torque).cwiseMin(lim.max_torque);
  return out;
}

double Path::recomputed_cost() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) sum += (waypoints[i] - waypoints[i - 1]).norm();
  return sum;
}

MsgType msg_type_of(const Payload& p) {
  return std::visit(
      [](const auto& v) -> MsgType {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointCloud>) return MsgType::PointCloud;
        if constexpr (std::is_same_v<T, ImageFrame>) return MsgType::Image;
        if constexpr (std::is_same_v<T, Pose>) return MsgType::Pose;
        if constexpr (std::is_same_v<T, Wrench>) return MsgType::Wrench;
        if constexpr (std::is_same_v<T, Path>) return MsgType::Path;
        if constexpr (std::is_same_v<T, PlanRequest>) return MsgType::PlanRequest;
        if constexpr (std::is_same_v<T, Status>) return MsgType::Status;
      },
      p);
}

Envelope make_envelope(std::string topic, std::uint64_t seq, Timestamp stamp, Payload payload) {
  Envelope e;
  e.topic = std::move(topic);
  e.msg_type = msg_type_of(payload);
  e.seq = seq;
  e.stamp_ns = stamp.nanos;
  e.payload = std::move(payload);
  return e;
}

json payload_to_json(const Payload& payload) {
  return std::visit([](const auto& v) { return to_json(v); }, payload);
}

Payload payload_from_json(MsgType type, const json& j) {
  switch (type) {
    case MsgType::PointCloud: return cloud_from(j);
    case MsgType::Image: return image_from(j);
    case MsgType::Pose: return pose_from(j);
    case MsgType::Wrench: return wrench_from(j);
    case MsgType::Path: return path_from(j);
    case MsgType::PlanRequest: return plan_request_from(j);
    case MsgType::Status:
      if (!j.is_object()) throw SchemaError{"status payload is not an object"};
      return Status{j};
  }
  throw SchemaError{"unknown message type"};
}

json envelope_to_json(const Envelope& e) {
  if (msg_type_of(e.payload) != e.msg_type) throw EncodeError("msg_type does not match payload");
  return {{"topic", e.topic},
          {"msg_type", to_string(e.msg_type)},
          {"seq", e.seq},
          {"stamp_ns", e.stamp_ns},
          {"payload", payload_to_json(e.payload)}};
}

Envelope envelope_from_json(const json& j) {
  try {
    if (!j.is_object()) throw SchemaError{"frame is not a JSON object"};
    Envelope e;
    e.topic = string_field(j, "topic");
    const auto type = msg_type_from_string(string_field(j, "msg_type"));
    if (!type) throw SchemaError{"unknown msg_type"};
    e.msg_type = *type;
    e.seq = unsigned_int(j, "seq");
    e.stamp_ns = signed_int(j, "stamp_ns");
    e.payload = payload_from_json(e.msg_type, member(j, "payload"));
    return e;
  } catch (const SchemaError& err) {
    throw DecodeError("schema violation: " + err.what, 0);
  } catch (const json::exception& err) {
    throw DecodeError(std::string("schema violation: ") + err.what(), 0);
  }
}

std::string frame_json(std::string_view body) {
  if (body.size() > 0xFFFFFFFFULL) throw EncodeError("frame too large");
  std::string out;
  out.reserve(kLengthPrefixBytes + body.size());
  put_length(out, static_cast<std::uint32_t>(body.size()));
  out.append(body);
  return out;
}

std::string encode(const Envelope& envelope) { return frame_json(envelope_to_json(envelope).dump()); }

std::optional<Envelope> try_decode_frame(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  consumed = 0;
  if (bytes.size() < kLengthPrefixBytes) return std::nullopt;
  const std::size_t len = read_length(bytes);
  if (bytes.size() < kLengthPrefixBytes + len) return std::nullopt;
  auto env = envelope_from_body(bytes.subspan(kLengthPrefixBytes, len), kLengthPrefixBytes);
  consumed = kLengthPrefixBytes + len;
  return env;
}

Envelope decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kLengthPrefixBytes) throw NeedMoreData(bytes.size(), kLengthPrefixBytes);
  const std::size_t len = read_length(bytes);
  if (bytes.size() < kLengthPrefixBytes + len) throw NeedMoreData(bytes.size(), kLengthPrefixBytes + len);
  return envelope_from_body(bytes.subspan(kLengthPrefixBytes, len), kLengthPrefixBytes);
}

Envelope decode(std::string_view bytes) {
  return decode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace uwtwin
