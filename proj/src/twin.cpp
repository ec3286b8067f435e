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

#include "uwtwin/twin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uwtwin {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 8> kFields{"pose", "estimate", "surface", "octree",
                                             "path", "follower", "mode", "last_error"};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

double wrap(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Teleop: return "TELEOP";
    case Mode::Autonomous: return "AUTONOMOUS";
    case Mode::Idle: return "IDLE";
  }
  return "IDLE";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "TELEOP") return Mode::Teleop;
  if (s == "AUTONOMOUS") return Mode::Autonomous;
  if (s == "IDLE") return Mode::Idle;
  return std::nullopt;
}

json SessionMetrics::to_json() const {
  auto counters = [](const std::map<std::string, TopicCounters>& m) {
    json out = json::object();
    for (const auto& [topic, c] : m) out[topic] = {{"messages", c.messages}, {"bytes", c.bytes}};
    return out;
  };
  return {{"received", counters(received)},
          {"sent", counters(sent)},
          {"teleop_commands", teleop_commands},
          {"teleop_acked", teleop_acked},
          {"autonomous_commands", autonomous_commands},
          {"idle_commands", idle_commands},
          {"stale_discarded", stale_discarded},
          {"malformed", malformed},
          {"map_rebuilds", map_rebuilds},
          {"truth_error_m", truth_error_m},
          {"delays", delay_report}};
}

Status plan_error(const std::string& code, const std::string& message, std::uint64_t request_id) {
  return Status{{{"op", "PLAN_ERROR"}, {"code", code}, {"message", message}, {"request_id", request_id}}};
}

Twin::Twin(TwinConfig config, bridge::PublishFn publish) : config_(std::move(config)), publish_(std::move(publish)) {
  for (const char* f : kFields) field_versions_[f] = 0;
}

void Twin::touch(const char* field) { field_versions_[field] = ++version_; }

std::uint64_t Twin::publish(const std::string& topic, Payload payload) {
  std::size_t bytes = 0;
  if (const auto* c = std::get_if<PointCloud>(&payload)) bytes = c->points.size() * 12;
  const auto seq = publish_(topic, std::move(payload));
  auto& s = metrics_.sent[topic];
  ++s.messages;
  s.bytes += bytes;
  return seq;
}

bool Twin::accept_seq(const std::string& topic, std::uint64_t seq) {
  auto [it, inserted] = last_seq_.try_emplace(topic, seq);
  if (inserted) return true;
  if (seq <= it->second) return false;
  it->second = seq;
  return true;
}

std::optional<double> Twin::staleness(Timestamp now) const {
  if (!last_pose_) return std::nullopt;
  return std::max(0.0, static_cast<double>(now.nanos - last_pose_recv_.nanos) * 1e-9);
}

VehicleState Twin::estimated_state() const {
  VehicleState s;
  if (!last_pose_) return s;
  s.pose = *last_pose_;
  s.pose.position = filt_pos_;
  s.stamp = last_pose_->stamp;
  s.twist.linear = last_pose_->orientation.conjugate() * filt_vel_;
  s.twist.angular = Vec3(0.0, 0.0, yaw_rate_);
  return s;
}

std::uint64_t Twin::ingest(const Envelope& env, const bridge::Delivery& delivery) {
  auto& rc = metrics_.received[env.topic];
  ++rc.messages;
  rc.bytes += delivery.frame_bytes;

  const std::string& t = env.topic;
  if (t == topics::kPose) {
    if (const auto* p = std::get_if<Pose>(&env.payload)) {
      if (!accept_seq(t, env.seq)) {
        ++metrics_.stale_discarded;
        return version_;
      }
      last_pose_seq_ = env.seq;
      on_pose(*p, delivery.recv);
      return version_;
    }
  } else if (t == topics::kTruth) {
    if (const auto* p = std::get_if<Pose>(&env.payload)) {
      if (last_pose_) metrics_.truth_error_m = (last_pose_->position - p->position).norm();
      return version_;
    }
  } else if (t == topics::kImage) {
    // Mirrored to the UI straight off the bus; nothing to keep here.
    if (std::holds_alternative<ImageFrame>(env.payload)) return version_;
  } else if (t == topics::kCloud) {
    if (const auto* c = std::get_if<PointCloud>(&env.payload)) {
      if (!accept_seq(t, env.seq)) {
        ++metrics_.stale_discarded;
        return version_;
      }
      on_cloud(*c);
      return version_;
    }
  } else if (t == topics::kPlanPath) {
    if (const auto* p = std::get_if<Path>(&env.payload)) {
      on_path(*p);
      return version_;
    }
  } else if (t == topics::kPlanStatus) {
    if (const auto* s = std::get_if<Status>(&env.payload)) {
      on_plan_status(*s);
      return version_;
    }
  } else if (t == topics::kUiAxes || t == topics::kUiPlanRequest || t == topics::kUiMode) {
    if (const auto* s = std::get_if<Status>(&env.payload)) {
      on_ui(t, *s, delivery.recv);
      return version_;
    }
  }
  ++metrics_.malformed;
  return version_;
}

void Twin::on_pose(const Pose& pose, Timestamp recv) {
  const double yaw = yaw_of(pose.orientation);
  double dt = 0.0;
  if (last_pose_) dt = static_cast<double>(pose.stamp.nanos - last_pose_->stamp.nanos) * 1e-9;
  if (!last_pose_ || dt <= 0.0 || dt > 1.0) {
    filt_pos_ = pose.position;
    filt_vel_ = Vec3::Zero();
    yaw_rate_ = 0.0;
  } else {
    const Vec3 predicted = filt_pos_ + filt_vel_ * dt;
    const Vec3 residual = pose.position - predicted;
    filt_pos_ = predicted + config_.velocity_alpha * residual;
    filt_vel_ += config_.velocity_beta * residual / dt;
    const double rate = wrap(yaw - yaw_of(last_pose_->orientation)) / dt;
    yaw_rate_ = 0.7 * yaw_rate_ + 0.3 * rate;
  }
  last_pose_ = pose;
  last_pose_recv_ = recv;
  touch("pose");
}

void Twin::on_cloud(const PointCloud& cloud) {
  cloud_.points.insert(cloud_.points.end(), cloud.points.begin(), cloud.points.end());
  cloud_.stamp = std::max(cloud_.stamp, cloud.stamp);
  last_cloud_seq_ = cloud.seq;
  last_cloud_size_ = cloud.points.size();
  pending_points_ += cloud.points.size();
  touch("estimate");
  if (pending_points_ >= config_.rebuild_threshold) rebuild_map();
}

void Twin::rebuild_map() {
  if (cloud_.points.empty()) return;
  auto surface = std::make_shared<DenseSurface>(densify(cloud_, config_.densify));
  auto tree = std::make_shared<OccupancyOctree>(config_.octree_resolution, config_.map_bounds);
  tree->insert_cloud(surface_to_cloud(*surface));
  surface_ = std::move(surface);
  octree_ = std::move(tree);
  ++octree_version_;
  pending_points_ = 0;
  ++metrics_.map_rebuilds;
  touch("surface");
  touch("octree");
}

void Twin::flush_map() {
  if (pending_points_ > 0 || !octree_) rebuild_map();
}

void Twin::fail(const std::string& code, const std::string& message) {
  json err = {{"code", code}, {"message", message}};
  if (err == last_error_) return;
  last_error_ = std::move(err);
  touch("last_error");
}

void Twin::set_mode_internal(Mode m) {
  if (m == mode_) return;
  mode_ = m;
  touch("mode");
}

void Twin::set_mode(Mode m, Timestamp now) {
  if (m == mode_) return;
  const bool legal = (mode_ == Mode::Idle) || m == Mode::Idle;
  if (!legal) {
    throw ModeError(std::string("illegal mode transition ") + std::string(to_string(mode_)) + " -> " +
                    std::string(to_string(m)));
  }
  if (m == Mode::Autonomous && (!active_path_ || follower_done_)) {
    throw ModeError("AUTONOMOUS requires an active path");
  }
  if (mode_ == Mode::Teleop) {
    Wrench stop;
    stop.stamp = now;
    publish(topics::kWrench, stop);
    ++metrics_.teleop_commands;
    ++metrics_.teleop_acked;
  } else if (mode_ == Mode::Autonomous) {
    Wrench stop;
    stop.stamp = now;
    publish(topics::kWrench, stop);
    ++metrics_.autonomous_commands;
  }
  set_mode_internal(m);
}

Wrench Twin::teleop_relay(const std::array<double, 6>& axes, Timestamp now) {
  if (mode_ != Mode::Teleop) throw ModeError("teleop_relay requires TELEOP mode");
  Wrench w;
  for (int i = 0; i < 3; ++i) {
    w.force[i] = config_.teleop_force_gain[i] * std::clamp(axes[i], -1.0, 1.0);
    w.torque[i] = config_.teleop_torque_gain[i] * std::clamp(axes[i + 3], -1.0, 1.0);
  }
  w = w.clamped(config_.limits);
  w.stamp = now;
  ++metrics_.teleop_commands;
  publish(topics::kWrench, w);
  ++metrics_.teleop_acked;
  return w;
}

std::uint64_t Twin::request_plan(const Vec3& goal, double budget, Timestamp now) {
  (void)now;
  if (!octree_) throw NoMapError();
  if (mode_ == Mode::Autonomous) throw ModeError("a plan is already executing");
  if (!last_pose_) throw ModeError("no vehicle pose received yet");
  PlanRequest req;
  req.start = last_pose_->position;
  req.goal = goal;
  req.robot_radius = config_.robot_radius;
  req.time_budget = budget;
  req.goal_tolerance = config_.goal_tolerance;
  req.bounds = config_.plan_bounds;
  req.request_id = next_request_id_++;
  req.rng_seed = config_.plan_seed + req.request_id;
  pending_request_ = req.request_id;
  publish(topics::kPlanRequest, req);
  return req.request_id;
}

void Twin::execute_path(Path path) {
  if (path.waypoints.empty()) throw ParamError("cannot execute an empty path");
  active_path_ = std::move(path);
  follower_index_ = 0;
  follower_done_ = false;
  touch("path");
  touch("follower");
  if (mode_ == Mode::Teleop) set_mode(Mode::Idle, last_pose_ ? last_pose_->stamp : Timestamp{});
  set_mode_internal(Mode::Autonomous);
}

void Twin::on_path(const Path& path) {
  if (!pending_request_ || path.request_id != *pending_request_) return;
  pending_request_.reset();
  if (!last_error_.is_null()) {
    last_error_ = nullptr;
    touch("last_error");
  }
  execute_path(path);
}

void Twin::on_plan_status(const Status& status) {
  const auto& b = status.body;
  if (b.value("op", "") != "PLAN_ERROR") return;
  if (!pending_request_ || b.value("request_id", std::uint64_t{0}) != *pending_request_) return;
  pending_request_.reset();
  fail(b.value("code", "PlanError"), b.value("message", ""));
}

void Twin::on_ui(const std::string& topic, const Status& status, Timestamp recv) {
  const auto& b = status.body;
  try {
    if (topic == topics::kUiAxes) {
      const auto& a = b.at("axes");
      if (!a.is_array() || a.size() != 6) throw ParamError("axes must have 6 components");
      std::array<double, 6> axes{};
      for (int i = 0; i < 6; ++i) axes[i] = a.at(i).get<double>();
      teleop_relay(axes, recv);
    } else if (topic == topics::kUiPlanRequest) {
      const auto& g = b.at("goal");
      request_plan(Vec3(g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()),
                   b.value("budget", 1.0), recv);
    } else if (topic == topics::kUiMode) {
      const auto m = mode_from_string(b.at("mode").get<std::string>());
      if (!m) throw ParamError("unknown mode");
      set_mode(*m, recv);
    }
  } catch (const ModeError& e) {
    fail("ModeError", e.what());
  } catch (const NoMapError& e) {
    fail("NoMapError", e.what());
  } catch (const Error& e) {
    ++metrics_.malformed;
    fail("BadRequest", e.what());
  } catch (const json::exception& e) {
    ++metrics_.malformed;
    fail("BadRequest", e.what());
  }
}

std::optional<Wrench> Twin::control_tick(Timestamp now) {
  if (mode_ != Mode::Autonomous || !active_path_ || !last_pose_) return std::nullopt;
  const auto cmd = follow_waypoints(estimated_state(), *active_path_, follower_index_, config_.gains,
                                    config_.accept_radius, config_.limits);
  Wrench w = cmd.wrench;
  w.stamp = now;
  publish(topics::kWrench, w);
  ++metrics_.autonomous_commands;
  if (cmd.waypoint_index != follower_index_) {
    follower_index_ = cmd.waypoint_index;
    touch("follower");
  }
  if (cmd.done) {
    follower_done_ = true;
    touch("follower");
    set_mode_internal(Mode::Idle);
  }
  return w;
}

json Twin::snapshot(std::optional<std::uint64_t> cursor, Timestamp now) const {
  json fields = json::object();
  for (const char* f : kFields) {
    if (cursor && field_versions_.at(f) <= *cursor) continue;
    const std::string name = f;
    if (name == "pose") {
      if (last_pose_) {
        const Quat& q = last_pose_->orientation;
        fields[name] = {{"position", vec_json(last_pose_->position)},
                        {"orientation", {q.w(), q.x(), q.y(), q.z()}},
                        {"stamp_ns", last_pose_->stamp.nanos},
                        {"seq", last_pose_seq_},
                        {"depth", last_pose_->position.z()}};
      } else {
        fields[name] = nullptr;
      }
    } else if (name == "estimate") {
      fields[name] = {{"features", last_cloud_size_},
                      {"cloud_seq", last_cloud_seq_},
                      {"stamp_ns", cloud_.stamp.nanos},
                      {"accumulated_points", cloud_.points.size()}};
    } else if (name == "surface") {
      if (surface_) {
        fields[name] = {{"version", octree_version_},
                        {"nx", surface_->nx},
                        {"ny", surface_->ny},
                        {"origin", {surface_->origin.x(), surface_->origin.y()}},
                        {"cell_size", surface_->cell_size},
                        {"defined_cells", surface_->defined_count()}};
      } else {
        fields[name] = nullptr;
      }
    } else if (name == "octree") {
      if (octree_) {
        fields[name] = {{"version", octree_version_},
                        {"voxels", octree_->size()},
                        {"resolution", octree_->resolution()}};
      } else {
        fields[name] = nullptr;
      }
    } else if (name == "path") {
      if (active_path_) {
        json wps = json::array();
        for (const auto& w : active_path_->waypoints) wps.push_back(vec_json(w));
        fields[name] = {{"request_id", active_path_->request_id},
                        {"planner", to_string(active_path_->planner_id)},
                        {"cost", active_path_->cost},
                        {"waypoints", std::move(wps)}};
      } else {
        fields[name] = nullptr;
      }
    } else if (name == "follower") {
      fields[name] = {{"index", follower_index_}, {"done", follower_done_}};
    } else if (name == "mode") {
      fields[name] = to_string(mode_);
    } else if (name == "last_error") {
      fields[name] = last_error_;
    }
  }
  const auto st = staleness(now);
  return {{"version", version_}, {"full", !cursor.has_value()}, {"fields", std::move(fields)},
          {"staleness_s", st ? json(*st) : json(nullptr)}};
}

json Twin::surface_body() const {
  if (!surface_) return nullptr;
  json j = surface_to_json(*surface_);
  j["version"] = octree_version_;
  return j;
}

json Twin::octree_body() const {
  if (!octree_) return nullptr;
  json j = octree_->to_json();
  j["version"] = octree_version_;
  return j;
}

Payload PlannerService::handle(const PlanRequest& request, const std::atomic<bool>* cancel) const {
  const auto map = maps_ ? maps_() : nullptr;
  if (!map) return plan_error("NoMapError", "no map available", request.request_id);
  try {
    return plan(request, *map, params_, variant_, nullptr, cancel);
  } catch (const StartInCollision& e) {
    return plan_error("StartInCollision", e.what(), request.request_id);
  } catch (const GoalInCollision& e) {
    return plan_error("GoalInCollision", e.what(), request.request_id);
  } catch (const NoPathFound& e) {
    Status s = plan_error("NoPathFound", e.what(), request.request_id);
    s.body["iterations"] = e.iterations();
    s.body["elapsed_s"] = e.elapsed();
    return s;
  } catch (const ParamError& e) {
    return plan_error("ParamError", e.what(), request.request_id);
  }
}

void PlannerService::attach(bridge::LocalBus& bus) {
  const auto conn = bus.connect("planner");
  auto publish = bus.publisher(conn);
  bus.subscribe(conn, topics::kPlanRequest, [this, publish](const Envelope& env, const bridge::Delivery&) {
    const auto* req = std::get_if<PlanRequest>(&env.payload);
    if (!req) return;
    Payload result = handle(*req);
    if (std::holds_alternative<Path>(result)) {
      publish(topics::kPlanPath, std::move(result));
    } else {
      publish(topics::kPlanStatus, std::move(result));
    }
  });
}

}  // namespace uwtwin
