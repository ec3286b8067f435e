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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "uwtwin/common.hpp"

namespace uwtwin {

enum class MsgType : std::uint8_t {
  PointCloud,
  Image,
  Pose,
  Wrench,
  Path,
  PlanRequest,
  Status,
};

std::string_view to_string(MsgType t);
std::optional<MsgType> msg_type_from_string(std::string_view s);

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Timestamp stamp;
  std::string frame = "world";

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs() &&
           a.stamp == b.stamp && a.frame == b.frame;
  }
};

struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  friend bool operator==(const Twist& a, const Twist& b) {
    return a.linear == b.linear && a.angular == b.angular;
  }
};

struct WrenchLimits {
  double max_force = 50.0;   // N, per component
  double max_torque = 5.0;   // N·m, per component
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  Timestamp stamp;

  Wrench clamped(const WrenchLimits& lim) const;

  friend bool operator==(const Wrench& a, const Wrench& b) {
    return a.force == b.force && a.torque == b.torque && a.stamp == b.stamp;
  }
};

struct Point3f {
  float x = 0.0F;
  float y = 0.0F;
  float z = 0.0F;

  Vec3 to_vec() const { return {x, y, z}; }
  static Point3f from_vec(const Vec3& v) {
    return {static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
  }
  friend bool operator==(const Point3f&, const Point3f&) = default;
};

struct PointCloud {
  std::vector<Point3f> points;
  Timestamp stamp;
  std::uint64_t seq = 0;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

enum class ImageEncoding : std::uint8_t { Gray8 };

struct ImageFrame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  ImageEncoding encoding = ImageEncoding::Gray8;
  std::vector<std::uint8_t> data;
  Timestamp stamp;

  std::uint8_t at(std::uint32_t col, std::uint32_t row) const { return data[row * width + col]; }
  friend bool operator==(const ImageFrame&, const ImageFrame&) = default;
};

enum class PlannerId : std::uint8_t { Rrt, RrtStar };
std::string_view to_string(PlannerId id);

struct PlanRequest {
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  double robot_radius = 0.45;
  double time_budget = 1.0;
  double goal_tolerance = 0.5;
  Aabb bounds;
  std::uint64_t rng_seed = 0;
  std::uint64_t request_id = 0;

  friend bool operator==(const PlanRequest& a, const PlanRequest& b) {
    return a.start == b.start && a.goal == b.goal && a.robot_radius == b.robot_radius &&
           a.time_budget == b.time_budget && a.goal_tolerance == b.goal_tolerance &&
           a.bounds == b.bounds && a.rng_seed == b.rng_seed && a.request_id == b.request_id;
  }
};

struct Path {
  std::vector<Vec3> waypoints;
  double cost = 0.0;
  PlannerId planner_id = PlannerId::RrtStar;
  std::uint64_t iterations = 0;
  double elapsed = 0.0;
  std::uint64_t request_id = 0;

  /// Sum of consecutive segment lengths.
  double recomputed_cost() const;

  friend bool operator==(const Path& a, const Path& b) {
    return a.waypoints == b.waypoints && a.cost == b.cost && a.planner_id == b.planner_id &&
           a.iterations == b.iterations && a.elapsed == b.elapsed && a.request_id == b.request_id;
  }
};

/// Free-form control/telemetry object (control verbs, UI requests, snapshots).
struct Status {
  nlohmann::json body = nlohmann::json::object();
  friend bool operator==(const Status&, const Status&) = default;
};

using Payload = std::variant<PointCloud, ImageFrame, Pose, Wrench, Path, PlanRequest, Status>;

MsgType msg_type_of(const Payload& p);

struct Envelope {
  std::string topic;
  MsgType msg_type = MsgType::Status;
  std::uint64_t seq = 0;
  std::int64_t stamp_ns = 0;
  Payload payload = Status{};

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

Envelope make_envelope(std::string topic, std::uint64_t seq, Timestamp stamp, Payload payload);

inline constexpr std::size_t kLengthPrefixBytes = 4;

/// Length-prefixed JSON frame. Throws EncodeError on any non-finite field.
std::string encode(const Envelope& envelope);

/// Inverse of encode for exactly one frame. Throws NeedMoreData when the
/// buffer is shorter than the declared frame, DecodeError on bad content.
Envelope decode(std::span<const std::uint8_t> bytes);
Envelope decode(std::string_view bytes);

/// Decodes the first frame of a stream buffer. Returns nullopt (and leaves
/// `consumed` at 0) if the frame is incomplete.
std::optional<Envelope> try_decode_frame(std::span<const std::uint8_t> bytes,
                                         std::size_t& consumed);

/// Body-only JSON conversion, used by the bag format.
nlohmann::json envelope_to_json(const Envelope& envelope);
Envelope envelope_from_json(const nlohmann::json& j);

nlohmann::json payload_to_json(const Payload& payload);
Payload payload_from_json(MsgType type, const nlohmann::json& j);

std::string frame_json(std::string_view json_body);

}  // namespace uwtwin
