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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "uwtwin/follower.hpp"

namespace uwtwin {
namespace {

VehicleState at(const Vec3& p) {
  VehicleState s;
  s.pose.position = p;
  return s;
}

Path line(std::vector<Vec3> pts) {
  Path p;
  p.waypoints = std::move(pts);
  p.cost = p.recomputed_cost();
  return p;
}

TEST(Follower, AtFinalWaypointIsDone) {
  const auto path = line({{0, 0, -5}, {3, 0, -5}});
  const auto cmd = follow_waypoints(at({3, 0, -5}), path, 1, FollowerGains{}, 0.3);
  EXPECT_TRUE(cmd.done);
  EXPECT_EQ(cmd.wrench.force, Vec3::Zero());
  EXPECT_EQ(cmd.wrench.torque, Vec3::Zero());
  EXPECT_EQ(cmd.waypoint_index, 1U);
}

TEST(Follower, ProportionalForceFromRest) {
  const FollowerGains g;
  const auto path = line({{0, 0, -5}});
  const auto cmd = follow_waypoints(at({-1, 0, -5}), path, 0, g, 0.3);
  EXPECT_FALSE(cmd.done);
  EXPECT_DOUBLE_EQ(cmd.wrench.force.x(), g.kp_lin);
  EXPECT_DOUBLE_EQ(cmd.wrench.force.y(), 0.0);
  EXPECT_DOUBLE_EQ(cmd.wrench.force.z(), 0.0);
  // Already facing the waypoint: no yaw correction.
  EXPECT_DOUBLE_EQ(cmd.wrench.torque.z(), 0.0);
}

TEST(Follower, MovingThroughTheFinalWaypointIsNotDone) {
  const auto path = line({{0, 0, -5}});
  auto s = at({0, 0, -5});
  s.twist.linear = Vec3(0.5, 0, 0);
  const auto cmd = follow_waypoints(s, path, 0, FollowerGains{}, 0.3);
  EXPECT_FALSE(cmd.done);
  EXPECT_LT(cmd.wrench.force.x(), 0.0);
}

TEST(Follower, AdvancesPastReachedWaypoints) {
  const auto path = line({{0, 0, -5}, {0.1, 0, -5}, {5, 0, -5}});
  const auto cmd = follow_waypoints(at({0, 0, -5}), path, 0, FollowerGains{}, 0.3);
  EXPECT_EQ(cmd.waypoint_index, 2U);
}

TEST(Follower, ForceIsClampedAndExpressedInBodyFrame) {
  auto s = at({0, 0, -5});
  s.pose.orientation = Quat(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
  const auto path = line({{100, 0, -5}});
  const auto cmd = follow_waypoints(s, path, 0, FollowerGains{}, 0.3);
  // World +x is body −y after a quarter turn.
  EXPECT_NEAR(cmd.wrench.force.y(), -50.0, 1e-9);
  EXPECT_NEAR(cmd.wrench.force.x(), 0.0, 1e-9);
  EXPECT_LT(cmd.wrench.torque.z(), 0.0);
}

TEST(Follower, YawOf) {
  for (double a : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    EXPECT_NEAR(yaw_of(Quat(Eigen::AngleAxisd(a, Vec3::UnitZ()))), a, 1e-12);
  }
}

TEST(Follower, ClosedLoopStraightTenMetres) {
  const VehicleParams params;
  const FollowerGains gains;
  const double accept = 0.3;
  const auto path = line({{0, 0, -5}, {10, 0, -5}});
  VehicleState s = at({0, 0, -5});
  const double dt = 0.01;
  const int per_tick = 5;  // 20 Hz control
  std::size_t idx = 0;
  Wrench cmd;
  bool done = false;
  double t = 0.0;
  for (int i = 0; i < 12000 && !done; ++i) {
    if (i % per_tick == 0) {
      const auto c = follow_waypoints(s, path, idx, gains, accept);
      cmd = c.wrench;
      idx = c.waypoint_index;
      done = c.done;
    }
    if (!done) s = step_dynamics(s, cmd, params, dt);
    t = (i + 1) * dt;
  }
  EXPECT_TRUE(done);
  EXPECT_LT(t, 120.0);
  EXPECT_LE((s.pose.position - path.waypoints.back()).norm(), accept);
}

}  // namespace
}  // namespace uwtwin
