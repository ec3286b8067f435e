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

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "uwtwin/common.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {

/// Seafloor depth grid. Node (ix, iy) sits at origin + cell_size * (ix, iy);
/// depth is row-major with rows along y: depth[iy * nx + ix].
struct Heightmap {
  Vec2 origin = Vec2::Zero();
  double cell_size = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> depth;

  double at(int ix, int iy) const { return depth[static_cast<std::size_t>(iy) * nx + ix]; }
  double& at(int ix, int iy) { return depth[static_cast<std::size_t>(iy) * nx + ix]; }
  Vec2 max_corner() const { return origin + cell_size * Vec2(nx - 1, ny - 1); }
  double min_depth() const;
  double max_depth() const;

  /// Throws ParamError if any invariant is violated.
  void validate() const;

  static Heightmap constant(Vec2 origin, double cell_size, int nx, int ny, double z);
};

/// Bilinear depth lookup; queries outside the grid clamp to the border.
double seafloor_depth(const Heightmap& map, const Vec2& xy);

nlohmann::json heightmap_to_json(const Heightmap& map);
Heightmap heightmap_from_json(const nlohmann::json& j);
Heightmap load_heightmap(const std::filesystem::path& path);
void save_heightmap(const Heightmap& map, const std::filesystem::path& path);

struct HarborSpec {
  Vec2 origin = Vec2::Zero();
  double extent = 60.0;       // m, square side
  double cell_size = 0.5;     // m
  double deepest = -14.0;     // m
  double relief = 4.0;        // m between deepest and shallowest point
  int octaves = 4;
  double base_wavelength = 24.0;  // m, coarsest noise lattice pitch
};

/// Multi-octave value-noise seafloor, rescaled to exactly span
/// [deepest, deepest + relief]. Deterministic in seed.
Heightmap generate_harbor(std::uint64_t seed, const HarborSpec& spec = {});

struct VehicleParams {
  double mass = 11.0;
  Vec3 inertia_diag{0.26, 0.23, 0.37};
  Vec3 drag_lin{18.0, 21.0, 36.0};    // N·(s/m)²
  Vec3 drag_ang{1.5, 1.5, 1.5};       // N·m·(s/rad)²
  double buoyancy_force = 11.0 * 9.81;
  double weight_force = 11.0 * 9.81;
  double collision_radius = 0.3;

  void validate() const;
};

struct VehicleState {
  Pose pose;      // world frame
  Twist twist;    // body frame
  Timestamp stamp;

  Vec3 world_velocity() const { return pose.orientation * twist.linear; }
};

/// ½ m |v|² + ½ ωᵀ I ω.
double kinetic_energy(const VehicleState& s, const VehicleParams& p);

/// Semi-implicit Euler step of the quadratic-drag rigid body. Velocities are
/// updated first and the pose is integrated with the updated velocities.
/// Throws ParamError unless 0 < dt <= 0.1. The sim loop itself is held to 0.05.
VehicleState step_dynamics(const VehicleState& state, const Wrench& cmd, const VehicleParams& params,
                           double dt);

bool check_ground_contact(const VehicleState& state, const Heightmap& map, const VehicleParams& params);

/// Clamps the vehicle onto the floor and removes downward world velocity.
/// Returns true if a contact was resolved.
bool resolve_ground_contact(VehicleState& state, const Heightmap& map, const VehicleParams& params);

}  // namespace uwtwin
