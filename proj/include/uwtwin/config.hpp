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

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "uwtwin/campaign.hpp"
#include "uwtwin/sim_node.hpp"

namespace uwtwin {

inline constexpr std::uint64_t kDefaultMapSeed = 7;

/// Everything a CLI run can be configured with. Unknown keys in the JSON
/// form are rejected so typos do not silently fall back to defaults.
struct ScenarioConfig {
  std::optional<std::filesystem::path> heightmap_file;
  std::uint64_t map_seed = kDefaultMapSeed;
  HarborSpec harbor;
  VehicleParams vehicle;
  NoiseConfig noise;
  TopicRates rates;
  PlannerParams planner;
  double robot_radius = 0.45;
  double goal_tolerance = 0.5;
  CampaignSpec campaign;

  ScenarioConfig();
  /// Throws ParamError.
  void validate() const;
  Heightmap heightmap() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& c);
/// Throws ParamError on unreadable files, bad JSON or bad values.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace uwtwin
