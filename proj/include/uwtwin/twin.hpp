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
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "uwtwin/bridge/local_bus.hpp"
#include "uwtwin/follower.hpp"
#include "uwtwin/mapping.hpp"
#include "uwtwin/octree.hpp"
#include "uwtwin/planner.hpp"

namespace uwtwin {

namespace topics {
inline const std::string kPose = "sim/pose";
inline const std::string kTruth = "sim/truth";
inline const std::string kCloud = "sim/cloud";
inline const std::string kImage = "sim/image";
inline const std::string kWrench = "cmd/wrench";
inline const std::string kPlanRequest = "plan/request";
inline const std::string kPlanPath = "plan/path";
inline const std::string kPlanStatus = "plan/status";
inline const std::string kSnapshot = "twin/snapshot";
inline const std::string kMetrics = "twin/metrics";
inline const std::string kUiAxes = "ui/axes";
inline const std::string kUiPlanRequest = "ui/plan_request";
inline const std::string kUiMode = "ui/mode";
}  // namespace topics

enum class Mode { Teleop, Autonomous, Idle };
std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

class ModeError : public Error {
 public:
  using Error::Error;
};

class NoMapError : public Error {
 public:
  NoMapError() : Error("no map has been built yet") {}
};

struct TwinConfig {
  std::size_t rebuild_threshold = 2000;
  DensifyParams densify;
  double octree_resolution = 0.25;
  Aabb map_bounds{Vec3(-5, -5, -20), Vec3(65, 65, 0)};
  Aabb plan_bounds{Vec3(0, 0, -15), Vec3(60, 60, -0.5)};
  Vec3 teleop_force_gain{20.0, 20.0, 20.0};
  Vec3 teleop_torque_gain{2.0, 2.0, 2.0};
  WrenchLimits limits;
  FollowerGains gains;
  double accept_radius = 0.3;
  double robot_radius = 0.45;
  double goal_tolerance = 0.5;
  std::uint64_t plan_seed = 1;
  double velocity_alpha = 0.2;
  double velocity_beta = 0.01;
};

struct TopicCounters {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct SessionMetrics {
  std::map<std::string, TopicCounters> received;
  std::map<std::string, TopicCounters> sent;
  std::uint64_t teleop_commands = 0;
  std::uint64_t teleop_acked = 0;
  std::uint64_t autonomous_commands = 0;
  std::uint64_t idle_commands = 0;  // must stay 0
  std::uint64_t stale_discarded = 0;
  std::uint64_t malformed = 0;
  std::uint64_t map_rebuilds = 0;
  double truth_error_m = 0.0;  // |estimate − truth| at the last truth sample
  nlohmann::json delay_report = nullptr;

  nlohmann::json to_json() const;
};

/// Mirrored state of the physical side plus the teleop / plan workflow.
/// Single writer; every entry point is called from one thread.
class Twin {
 public:
  Twin(TwinConfig config, bridge::PublishFn publish);

  /// Applies one envelope from the bus. Returns the state version.
  std::uint64_t ingest(const Envelope& envelope, const bridge::Delivery& delivery);
  std::uint64_t ingest(const Envelope& envelope, Timestamp recv) {
    return ingest(envelope, bridge::Delivery{recv, 0});
  }

  /// Scales UI axes (surge, sway, heave, roll, pitch, yaw in [-1, 1]) and
  /// publishes the wrench. Throws ModeError outside TELEOP.
  Wrench teleop_relay(const std::array<double, 6>& axes, Timestamp now);

  /// Publishes a PLAN_REQUEST from the current pose. Throws NoMapError or
  /// ModeError. The PATH / error reply arrives later through ingest.
  std::uint64_t request_plan(const Vec3& goal, double budget, Timestamp now);

  /// Starts following `path` immediately (IDLE or TELEOP -> AUTONOMOUS).
  void execute_path(Path path);

  /// One follower step in AUTONOMOUS; publishes and returns the wrench.
  std::optional<Wrench> control_tick(Timestamp now);

  /// Throws ModeError for TELEOP <-> AUTONOMOUS, or AUTONOMOUS without a path.
  void set_mode(Mode m, Timestamp now);

  void flush_map();

  /// Changed fields since `cursor`, or everything when absent.
  nlohmann::json snapshot(std::optional<std::uint64_t> cursor, Timestamp now) const;
  nlohmann::json surface_body() const;
  nlohmann::json octree_body() const;

  std::uint64_t version() const { return version_; }
  Mode mode() const { return mode_; }
  const std::optional<Pose>& last_pose() const { return last_pose_; }
  std::optional<double> staleness(Timestamp now) const;
  const std::optional<Path>& active_path() const { return active_path_; }
  bool follower_done() const { return follower_done_; }
  const nlohmann::json& last_error() const { return last_error_; }
  std::shared_ptr<const OccupancyOctree> octree() const { return octree_; }
  std::shared_ptr<const DenseSurface> surface() const { return surface_; }
  std::uint64_t octree_version() const { return octree_version_; }
  const SessionMetrics& metrics() const { return metrics_; }
  SessionMetrics& metrics() { return metrics_; }
  const TwinConfig& config() const { return config_; }
  std::size_t accumulated_points() const { return cloud_.points.size(); }

  /// The follower's view: filtered estimate position and velocity.
  VehicleState estimated_state() const;

 private:
  void touch(const char* field);
  void set_mode_internal(Mode m);
  std::uint64_t publish(const std::string& topic, Payload payload);
  bool accept_seq(const std::string& topic, std::uint64_t seq);
  void on_pose(const Pose& pose, Timestamp recv);
  void on_cloud(const PointCloud& cloud);
  void on_path(const Path& path);
  void on_plan_status(const Status& status);
  void on_ui(const std::string& topic, const Status& status, Timestamp recv);
  void rebuild_map();
  void fail(const std::string& code, const std::string& message);

  TwinConfig config_;
  bridge::PublishFn publish_;
  std::uint64_t version_ = 0;
  std::map<std::string, std::uint64_t> field_versions_;
  std::map<std::string, std::uint64_t> last_seq_;

  Mode mode_ = Mode::Idle;
  std::optional<Pose> last_pose_;
  Timestamp last_pose_recv_;
  std::uint64_t last_pose_seq_ = 0;
  Vec3 filt_pos_ = Vec3::Zero();
  Vec3 filt_vel_ = Vec3::Zero();
  double yaw_rate_ = 0.0;

  PointCloud cloud_;
  std::uint64_t last_cloud_seq_ = 0;
  std::size_t last_cloud_size_ = 0;
  std::size_t pending_points_ = 0;
  std::shared_ptr<const DenseSurface> surface_;
  std::shared_ptr<const OccupancyOctree> octree_;
  std::uint64_t octree_version_ = 0;

  std::optional<Path> active_path_;
  std::size_t follower_index_ = 0;
  bool follower_done_ = false;
  std::optional<std::uint64_t> pending_request_;
  std::uint64_t next_request_id_ = 1;
  nlohmann::json last_error_ = nullptr;

  SessionMetrics metrics_;
};

/// Serves PLAN_REQUESTs against the latest frozen octree.
class PlannerService {
 public:
  using MapSource = std::function<std::shared_ptr<const OccupancyOctree>()>;

  PlannerService(PlannerParams params, MapSource maps, PlannerId variant = PlannerId::RrtStar)
      : params_(params), maps_(std::move(maps)), variant_(variant) {}

  /// Path on success; otherwise a STATUS {op: PLAN_ERROR, code, message, request_id}.
  Payload handle(const PlanRequest& request, const std::atomic<bool>* cancel = nullptr) const;

  /// Subscribes to plan/request on a local bus and answers synchronously.
  void attach(bridge::LocalBus& bus);

 private:
  PlannerParams params_;
  MapSource maps_;
  PlannerId variant_;
};

Status plan_error(const std::string& code, const std::string& message, std::uint64_t request_id);

}  // namespace uwtwin
