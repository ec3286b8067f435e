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

#include "uwtwin/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace uwtwin {

double Heightmap::min_depth() const { return *std::min_element(depth.begin(), depth.end()); }
double Heightmap::max_depth() const { return *std::max_element(depth.begin(), depth.end()); }

void Heightmap::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ParamError("heightmap cell_size must be > 0");
  if (nx < 2 || ny < 2) throw ParamError("heightmap needs at least 2x2 nodes");
  if (depth.size() != static_cast<std::size_t>(nx) * ny) throw ParamError("heightmap depth size mismatch");
  if (!origin.allFinite()) throw ParamError("heightmap origin must be finite");
  for (double d : depth) {
    if (!std::isfinite(d) || d >= 0.0) throw ParamError("heightmap depths must be finite and below the surface");
  }
}

Heightmap Heightmap::constant(Vec2 origin, double cell_size, int nx, int ny, double z) {
  Heightmap m;
  m.origin = origin;
  m.cell_size = cell_size;
  m.nx = nx;
  m.ny = ny;
  m.depth.assign(static_cast<std::size_t>(nx) * ny, z);
  return m;
}

double seafloor_depth(const Heightmap& map, const Vec2& xy) {
  const double gx = std::clamp((xy.x() - map.origin.x()) / map.cell_size, 0.0, double(map.nx - 1));
  const double gy = std::clamp((xy.y() - map.origin.y()) / map.cell_size, 0.0, double(map.ny - 1));
  const int ix = std::min(static_cast<int>(gx), map.nx - 2);
  const int iy = std::min(static_cast<int>(gy), map.ny - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double z00 = map.at(ix, iy);
  const double z10 = map.at(ix + 1, iy);
  const double z01 = map.at(ix, iy + 1);
  const double z11 = map.at(ix + 1, iy + 1);
  return (1 - fy) * ((1 - fx) * z00 + fx * z10) + fy * ((1 - fx) * z01 + fx * z11);
}

nlohmann::json heightmap_to_json(const Heightmap& map) {
  return {{"origin", {map.origin.x(), map.origin.y()}},
          {"cell_size", map.cell_size},
          {"nx", map.nx},
          {"ny", map.ny},
          {"depth", map.depth}};
}

Heightmap heightmap_from_json(const nlohmann::json& j) {
  Heightmap m;
  try {
    m.origin = Vec2(j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>());
    m.cell_size = j.at("cell_size").get<double>();
    m.nx = j.at("nx").get<int>();
    m.ny = j.at("ny").get<int>();
    m.depth = j.at("depth").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad heightmap JSON: ") + e.what());
  }
  m.validate();
  return m;
}

Heightmap load_heightmap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open heightmap " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParamError("bad heightmap JSON in " + path.string() + ": " + e.what());
  }
  return heightmap_from_json(j);
}

void save_heightmap(const Heightmap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParamError("cannot write heightmap " + path.string());
  out << heightmap_to_json(map).dump();
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw ParamError("mass must be > 0");
  if (!(inertia_diag.array() > 0.0).all()) throw ParamError("inertia must be > 0");
  if (!(drag_lin.array() >= 0.0).all() || !(drag_ang.array() >= 0.0).all()) {
    throw ParamError("drag coefficients must be >= 0");
  }
  if (buoyancy_force < 0.0 || weight_force < 0.0) throw ParamError("buoyancy/weight must be >= 0");
  if (!(collision_radius > 0.0)) throw ParamError("collision_radius must be > 0");
}

double kinetic_energy(const VehicleState& s, const VehicleParams& p) {
  const Vec3& v = s.twist.linear;
  const Vec3& w = s.twist.angular;
  return 0.5 * p.mass * v.squaredNorm() + 0.5 * w.cwiseProduct(p.inertia_diag).dot(w);
}

namespace {

// Quadratic drag impulse over dt, limited so it can stop a component but
// never reverse it.
double dragged(double v, double coeff, double inv_inertia, double dt) {
  const double dv = coeff * v * std::abs(v) * inv_inertia * dt;
  if (std::abs(dv) >= std::abs(v)) return 0.0;
  return v - dv;
}

}  // namespace

VehicleState step_dynamics(const VehicleState& state, const Wrench& cmd, const VehicleParams& params,
                           double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw ParamError("dt must lie in (0, 0.1]");

  VehicleState next = state;
  const Quat& q = state.pose.orientation;

  const Vec3 net_up_world(0.0, 0.0, params.buoyancy_force - params.weight_force);
  const Vec3 restoring_body = q.conjugate() * net_up_world;
  const Vec3 lin_accel_ext = (cmd.force + restoring_body) / params.mass;

  Vec3 v = state.twist.linear + lin_accel_ext * dt;
  Vec3 w = state.twist.angular + cmd.torque.cwiseQuotient(params.inertia_diag) * dt;
  for (int i = 0; i < 3; ++i) {
    v[i] = dragged(v[i], params.drag_lin[i], 1.0 / params.mass, dt);
    w[i] = dragged(w[i], params.drag_ang[i], 1.0 / params.inertia_diag[i], dt);
  }
  next.twist.linear = v;
  next.twist.angular = w;

  next.pose.position = state.pose.position + (q * v) * dt;
  const Vec3 rot = w * dt;
  const double angle = rot.norm();
  if (angle > 0.0) {
    next.pose.orientation = (q * Quat(Eigen::AngleAxisd(angle, rot / angle))).normalized();
  }

  next.stamp = Timestamp{state.stamp.nanos + static_cast<std::int64_t>(std::llround(dt * 1e9))};
  next.pose.stamp = next.stamp;
  return next;
}

bool check_ground_contact(const VehicleState& state, const Heightmap& map, const VehicleParams& params) {
  const Vec3& p = state.pose.position;
  return p.z() - params.collision_radius < seafloor_depth(map, p.head<2>());
}

bool resolve_ground_contact(VehicleState& state, const Heightmap& map, const VehicleParams& params) {
  if (!check_ground_contact(state, map, params)) return false;
  Vec3& p = state.pose.position;
  p.z() = seafloor_depth(map, p.head<2>()) + params.collision_radius;
  Vec3 vw = state.world_velocity();
  if (vw.z() < 0.0) {
    vw.z() = 0.0;
    state.twist.linear = state.pose.orientation.conjugate() * vw;
  }
  return true;
}

}  // namespace uwtwin
