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

#include "uwtwin/follower.hpp"

#include <cmath>
#include <numbers>

namespace uwtwin {

double yaw_of(const Quat& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

namespace {

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

FollowCommand follow_waypoints(const VehicleState& state, const Path& path, std::size_t active_index,
                               const FollowerGains& gains, double accept_radius, const WrenchLimits& limits) {
  if (path.waypoints.empty()) throw ParamError("follow_waypoints: empty path");
  FollowCommand out;
  out.wrench.stamp = state.stamp;
  const Vec3& pos = state.pose.position;
  const std::size_t last = path.waypoints.size() - 1;

  std::size_t idx = std::min(active_index, last);
  while (idx < last && (path.waypoints[idx] - pos).norm() <= accept_radius) ++idx;
  out.waypoint_index = idx;
  if (idx == last && (path.waypoints[last] - pos).norm() <= accept_radius &&
      state.world_velocity().norm() <= gains.settle_speed) {
    out.done = true;
    return out;
  }

  const Vec3& wp = path.waypoints[idx];
  const Quat& q = state.pose.orientation;
  const Vec3 force_world = gains.kp_lin * (wp - pos) - gains.kd_lin * state.world_velocity();
  out.wrench.force = q.conjugate() * force_world;

  const Vec2 horiz = (wp - pos).head<2>();
  const double yaw_rate = state.twist.angular.z();
  double torque_z = -gains.kd_yaw * yaw_rate;
  if (horiz.norm() > accept_radius) {
    const double err = wrap_angle(std::atan2(horiz.y(), horiz.x()) - yaw_of(q));
    torque_z += gains.kp_yaw * err;
  }
  out.wrench.torque = Vec3(0.0, 0.0, torque_z);
  out.wrench = out.wrench.clamped(limits);
  return out;
}

}  // namespace uwtwin
