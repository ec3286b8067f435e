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

#include "uwtwin/config.hpp"

#include <fstream>
#include <set>

namespace uwtwin {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParamError(std::string(section) + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ParamError(std::string(section) + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec(const json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ParamError(std::string(key) + ": expected 3 numbers");
  out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

ScenarioConfig::ScenarioConfig() {
  campaign.seed = 1;
  // Reproducible tables by default; budgets become iteration caps.
  campaign.mode = BudgetMode::Iterations;
  campaign.iterations_per_second = 100000.0;
}

void ScenarioConfig::validate() const {
  if (!heightmap_file) {
    if (!(harbor.extent > 0.0 && harbor.cell_size > 0.0 && harbor.relief >= 0.0 && harbor.octaves >= 1)) {
      throw ParamError("heightmap: bad generator parameters");
    }
  }
  vehicle.validate();
  noise.validate();
  rates.validate();
  planner.validate();
  if (!(robot_radius > 0.0)) throw ParamError("robot_radius must be > 0");
  if (!(goal_tolerance > 0.0)) throw ParamError("goal_tolerance must be > 0");
  if (campaign.trials < 1) throw ParamError("campaign: trials must be >= 1");
  if (campaign.budgets.empty()) throw ParamError("campaign: budgets must be non-empty");
  for (double b : campaign.budgets) {
    if (!(b > 0.0)) throw ParamError("campaign: budgets must be positive");
  }
  if (campaign.classes.empty()) throw ParamError("campaign: classes must be non-empty");
  if (!(campaign.iterations_per_second > 0.0)) throw ParamError("campaign: iterations_per_second must be > 0");
}

Heightmap ScenarioConfig::heightmap() const {
  return heightmap_file ? load_heightmap(*heightmap_file) : generate_harbor(map_seed, harbor);
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  try {
    check_keys(j, "config", {"heightmap", "vehicle", "noise", "rates", "planner", "campaign"});
    if (j.contains("heightmap")) {
      const auto& h = j.at("heightmap");
      check_keys(h, "heightmap", {"file", "seed", "extent", "cell_size", "deepest", "relief", "octaves",
                                  "base_wavelength"});
      if (h.contains("file")) c.heightmap_file = h.at("file").get<std::string>();
      read(h, "seed", c.map_seed);
      read(h, "extent", c.harbor.extent);
      read(h, "cell_size", c.harbor.cell_size);
      read(h, "deepest", c.harbor.deepest);
      read(h, "relief", c.harbor.relief);
      read(h, "octaves", c.harbor.octaves);
      read(h, "base_wavelength", c.harbor.base_wavelength);
    }
    if (j.contains("vehicle")) {
      const auto& v = j.at("vehicle");
      check_keys(v, "vehicle", {"mass", "inertia", "drag_lin", "drag_ang", "buoyancy", "weight", "radius"});
      read(v, "mass", c.vehicle.mass);
      read_vec(v, "inertia", c.vehicle.inertia_diag);
      read_vec(v, "drag_lin", c.vehicle.drag_lin);
      read_vec(v, "drag_ang", c.vehicle.drag_ang);
      read(v, "buoyancy", c.vehicle.buoyancy_force);
      read(v, "weight", c.vehicle.weight_force);
      read(v, "radius", c.vehicle.collision_radius);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      check_keys(n, "noise", {"sigma_pos", "sigma_ang", "sigma_obs", "drift_rate", "seed"});
      read(n, "sigma_pos", c.noise.sigma_pos);
      read(n, "sigma_ang", c.noise.sigma_ang);
      read(n, "sigma_obs", c.noise.sigma_obs);
      read(n, "drift_rate", c.noise.drift_rate);
      read(n, "seed", c.noise.rng_seed);
    }
    if (j.contains("rates")) {
      const auto& r = j.at("rates");
      check_keys(r, "rates", {"pose", "wrench", "image", "cloud"});
      read(r, "pose", c.rates.pose);
      read(r, "wrench", c.rates.wrench);
      read(r, "image", c.rates.image);
      read(r, "cloud", c.rates.cloud);
    }
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      check_keys(p, "planner", {"step_eta", "goal_bias", "gamma", "max_iterations", "robot_radius", "goal_tolerance"});
      read(p, "step_eta", c.planner.step_eta);
      read(p, "goal_bias", c.planner.goal_bias);
      read(p, "gamma", c.planner.rewire_gamma);
      read(p, "max_iterations", c.planner.max_iterations);
      read(p, "robot_radius", c.robot_radius);
      read(p, "goal_tolerance", c.goal_tolerance);
    }
    if (j.contains("campaign")) {
      const auto& k = j.at("campaign");
      check_keys(k, "campaign", {"classes", "trials", "budgets", "seed", "budget_mode", "iterations_per_second"});
      if (k.contains("classes")) {
        c.campaign.classes.clear();
        for (const auto& s : k.at("classes")) {
          const auto cls = scenario_class_from_string(s.get<std::string>());
          if (!cls) throw ParamError("campaign: unknown scenario class " + s.dump());
          c.campaign.classes.push_back(*cls);
        }
      }
      if (k.contains("trials")) {
        const auto t = k.at("trials").get<long long>();
        if (t < 1) throw ParamError("campaign: trials must be >= 1");
        c.campaign.trials = static_cast<std::size_t>(t);
      }
      read(k, "budgets", c.campaign.budgets);
      read(k, "seed", c.campaign.seed);
      if (k.contains("budget_mode")) {
        const auto m = k.at("budget_mode").get<std::string>();
        if (m == "time") {
          c.campaign.mode = BudgetMode::Time;
        } else if (m == "iterations") {
          c.campaign.mode = BudgetMode::Iterations;
        } else {
          throw ParamError("campaign: budget_mode must be 'time' or 'iterations'");
        }
      }
      read(k, "iterations_per_second", c.campaign.iterations_per_second);
    }
  } catch (const json::exception& e) {
    throw ParamError(std::string("config: ") + e.what());
  }
  c.campaign.params = c.planner;
  c.campaign.robot_radius = c.robot_radius;
  c.campaign.goal_tolerance = c.goal_tolerance;
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json h = {{"seed", c.map_seed},
            {"extent", c.harbor.extent},
            {"cell_size", c.harbor.cell_size},
            {"deepest", c.harbor.deepest},
            {"relief", c.harbor.relief},
            {"octaves", c.harbor.octaves},
            {"base_wavelength", c.harbor.base_wavelength}};
  if (c.heightmap_file) h["file"] = c.heightmap_file->string();
  json classes = json::array();
  for (auto cls : c.campaign.classes) classes.push_back(std::string(to_string(cls)));
  return {{"heightmap", h},
          {"vehicle",
           {{"mass", c.vehicle.mass},
            {"inertia", vec(c.vehicle.inertia_diag)},
            {"drag_lin", vec(c.vehicle.drag_lin)},
            {"drag_ang", vec(c.vehicle.drag_ang)},
            {"buoyancy", c.vehicle.buoyancy_force},
            {"weight", c.vehicle.weight_force},
            {"radius", c.vehicle.collision_radius}}},
          {"noise",
           {{"sigma_pos", c.noise.sigma_pos},
            {"sigma_ang", c.noise.sigma_ang},
            {"sigma_obs", c.noise.sigma_obs},
            {"drift_rate", c.noise.drift_rate},
            {"seed", c.noise.rng_seed}}},
          {"rates", {{"pose", c.rates.pose}, {"wrench", c.rates.wrench}, {"image", c.rates.image}, {"cloud", c.rates.cloud}}},
          {"planner",
           {{"step_eta", c.planner.step_eta},
            {"goal_bias", c.planner.goal_bias},
            {"gamma", c.planner.rewire_gamma},
            {"max_iterations", c.planner.max_iterations},
            {"robot_radius", c.robot_radius},
            {"goal_tolerance", c.goal_tolerance}}},
          {"campaign",
           {{"classes", classes},
            {"trials", c.campaign.trials},
            {"budgets", c.campaign.budgets},
            {"seed", c.campaign.seed},
            {"budget_mode", c.campaign.mode == BudgetMode::Time ? "time" : "iterations"},
            {"iterations_per_second", c.campaign.iterations_per_second}}}};
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParamError("config " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace uwtwin
