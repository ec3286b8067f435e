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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uwtwin/envsim.hpp"
#include "uwtwin/kernels.hpp"
#include "uwtwin/mapping.hpp"
#include "uwtwin/octree.hpp"
#include "uwtwin/planner.hpp"

namespace uwtwin {

enum class ScenarioClass { Simple, CollisionProne, NearFloor };

std::string_view to_string(ScenarioClass c);
std::optional<ScenarioClass> scenario_class_from_string(std::string_view s);
inline constexpr ScenarioClass kAllClasses[] = {ScenarioClass::Simple, ScenarioClass::CollisionProne,
                                                ScenarioClass::NearFloor};

/// Time: the budget is wall-clock seconds. Iterations: the budget is
/// converted to an iteration cap at a fixed rate so tables reproduce
/// exactly across machines.
enum class BudgetMode { Time, Iterations };

/// Octree and bounds the campaign plans against.
struct PlanningWorld {
  Heightmap map;
  DenseSurface surface;
  std::shared_ptr<const OccupancyOctree> octree;
  Aabb plan_bounds;
};

/// Samples the heightmap at every surface cell centre, densifies and
/// voxelises the result. Octree bounds pad the map by 5 m below and around.
PlanningWorld build_planning_world(const Heightmap& map, const DensifyParams& densify_params = {},
                                   double resolution = 0.25, kernels::Exec exec = kernels::Exec::Parallel);

struct Trial {
  ScenarioClass cls = ScenarioClass::Simple;
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  std::uint64_t seed = 0;
};

/// Deterministic in seed. Every endpoint is collision-free for
/// robot_radius and at least 2 m inside the horizontal plan bounds.
std::vector<Trial> generate_trials(const PlanningWorld& world, ScenarioClass cls, std::size_t n, std::uint64_t seed,
                                   double robot_radius = 0.45);

struct CampaignSpec {
  std::vector<ScenarioClass> classes{std::begin(kAllClasses), std::end(kAllClasses)};
  std::vector<double> budgets{0.5, 1.0, 2.0};
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  PlannerParams params;
  PlannerId variant = PlannerId::RrtStar;
  BudgetMode mode = BudgetMode::Time;
  double iterations_per_second = 4000.0;  // Iterations mode only
  double robot_radius = 0.45;
  double goal_tolerance = 0.5;
  kernels::Exec exec = kernels::Exec::Parallel;
};

struct TrialResult {
  Trial trial;
  double budget = 0.0;
  bool success = false;
  std::string error;  // exception name on failure
  Path path;
  double elapsed = 0.0;
  std::uint64_t iterations = 0;
};

struct CampaignRow {
  ScenarioClass cls = ScenarioClass::Simple;
  double budget = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double mean_cost = 0.0;  // over successes; NaN if none
  double mean_iterations = 0.0;
};

struct CampaignResult {
  std::vector<CampaignRow> rows;
  std::vector<TrialResult> trials;
  double wall_seconds = 0.0;
  std::string to_csv() const;
};

CampaignResult run_campaign(const PlanningWorld& world, const CampaignSpec& spec);

}  // namespace uwtwin
