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

#include <cstddef>

#include "uwtwin/envsim.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {

struct FollowerGains {
  double kp_lin = 8.0;    // N/m
  double kd_lin = 12.0;   // N·s/m
  double kp_yaw = 2.0;    // N·m/rad
  double kd_yaw = 1.0;    // N·m·s/rad
  double settle_speed = 0.05;  // m/s allowed at the final waypoint
};

struct FollowCommand {
  Wrench wrench;
  std::size_t waypoint_index = 0;
  bool done = false;
};

/// PD law toward path.waypoints[active_index]. The world-frame force
/// kp·(wp − p) − kd·v is rotated into the body frame and clamped; yaw torque
/// turns the bow toward the waypoint while it is farther than accept_radius
/// horizontally. The index advances through every waypoint already inside
/// accept_radius; reaching the last one at no more than settle_speed
/// yields a zero wrench and done.
FollowCommand follow_waypoints(const VehicleState& state, const Path& path, std::size_t active_index,
                               const FollowerGains& gains, double accept_radius,
                               const WrenchLimits& limits = {});

double yaw_of(const Quat& q);

}  // namespace uwtwin
