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

#include <string>

#include "uwtwin/bridge/bag.hpp"
#include "uwtwin/sim_node.hpp"
#include "uwtwin/twin.hpp"

namespace uwtwin {

/// Headless lockstep run on an in-process bus: survey the seafloor with a
/// lawnmower pattern, build the map, plan to an open-water goal and follow
/// the plan. Everything runs on simulated time.
struct MissionConfig {
  std::uint64_t seed = 7;
  HarborSpec harbor;
  SimConfig sim;
  TwinConfig twin;
  PlannerParams planner;
  Vec2 survey_min{20.0, 20.0};
  Vec2 survey_max{40.0, 40.0};
  double survey_spacing = 5.0;
  double survey_depth = -6.0;
  double goal_distance = 15.0;
  double goal_depth = -4.0;
  double plan_budget = 30.0;  // s of wall time; the iteration cap binds first
  double leg_timeout = 600.0;  // s of sim time per leg
  double settle_time = 1.0;   // s after DONE before arrival is judged
  bridge::BagRecorder* recorder = nullptr;  // sees sensor and command traffic when set
  MissionConfig();
};

struct MissionResult {
  bool survey_done = false;
  bool plan_ok = false;
  bool arrived = false;
  std::string failure;
  Vec3 goal = Vec3::Zero();
  Vec3 final_position = Vec3::Zero();
  double final_error = 0.0;
  std::size_t contact_events = 0;
  double sim_time = 0.0;
  double survey_time = 0.0;
  double transit_time = 0.0;
  double wall_time = 0.0;
  std::size_t map_rebuilds = 0;
  std::size_t octree_voxels = 0;
  Path path;
  SessionMetrics metrics;
};

/// Waypoints of a boustrophedon over [lo, hi] at a fixed depth, starting at lo.
std::vector<Vec3> lawnmower(const Vec2& lo, const Vec2& hi, double spacing, double z);

MissionResult run_mission(const MissionConfig& config);

}  // namespace uwtwin
