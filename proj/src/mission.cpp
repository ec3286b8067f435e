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

#include "uwtwin/mission.hpp"

#include <chrono>
#include <cmath>

namespace uwtwin {

MissionConfig::MissionConfig() {
  sim.publish_images = false;
  sim.start_position = Vec3(survey_min.x(), survey_min.y(), survey_depth);
  sim.noise.rng_seed = seed;
  planner.max_iterations = 4000;
  twin.map_bounds = Aabb{Vec3(-5, -5, -20), Vec3(65, 65, 0)};
  twin.plan_bounds = Aabb{Vec3(survey_min.x() - 5, survey_min.y() - 5, -8.0),
                          Vec3(survey_max.x() + 5, survey_max.y() + 5, -1.0)};
}

std::vector<Vec3> lawnmower(const Vec2& lo, const Vec2& hi, double spacing, double z) {
  if (!(spacing > 0.0)) throw ParamError("lawnmower spacing must be positive");
  std::vector<Vec3> out;
  const int lines = static_cast<int>(std::floor((hi.y() - lo.y()) / spacing + 1e-9)) + 1;
  for (int i = 0; i < lines; ++i) {
    const double y = lo.y() + spacing * i;
    const bool forward = i % 2 == 0;
    out.emplace_back(forward ? lo.x() : hi.x(), y, z);
    out.emplace_back(forward ? hi.x() : lo.x(), y, z);
  }
  return out;
}

MissionResult run_mission(const MissionConfig& config) {
  const auto wall_start = std::chrono::steady_clock::now();
  MissionResult result;

  const Heightmap map = generate_harbor(config.seed, config.harbor);
  const SimNode* sim_ptr = nullptr;
  bridge::LocalBus bus([&sim_ptr] { return sim_ptr ? sim_ptr->now() : Timestamp{}; });

  const auto sim_conn = bus.connect("sim");
  const auto twin_conn = bus.connect("twin");
  SimNode sim(map, config.sim, bus.publisher(sim_conn));
  sim_ptr = &sim;
  Twin twin(config.twin, bus.publisher(twin_conn));

  PlannerService planner(config.planner, [&twin] { return twin.octree(); });
  planner.attach(bus);

  bus.subscribe(sim_conn, topics::kWrench, [&sim](const Envelope& env, const bridge::Delivery&) {
    if (const auto* w = std::get_if<Wrench>(&env.payload)) sim.on_wrench(*w);
  });
  for (const auto* t : {&topics::kPose, &topics::kTruth, &topics::kCloud, &topics::kPlanPath, &topics::kPlanStatus}) {
    bus.subscribe(twin_conn, *t, [&twin](const Envelope& env, const bridge::Delivery& d) { twin.ingest(env, d); });
  }

  if (config.recorder) {
    const auto rec = bus.connect("recorder");
    for (const auto* t : {&topics::kPose, &topics::kTruth, &topics::kCloud, &topics::kWrench}) {
      bus.subscribe(rec, *t, config.recorder->handler());
    }
  }

  const double control_period = 1.0 / config.sim.rates.wrench;
  double next_control = 0.0;
  auto tick = [&] {
    sim.step();
    if (sim.elapsed() + 1e-9 >= next_control) {
      next_control += control_period;
      twin.control_tick(sim.now());
    }
  };
  auto follow = [&](double timeout) {
    const double until = sim.elapsed() + timeout;
    while (twin.mode() == Mode::Autonomous && sim.elapsed() < until) tick();
    return twin.mode() != Mode::Autonomous && twin.follower_done();
  };
  auto finish = [&] {
    result.final_position = sim.state().pose.position;
    result.final_error = (result.final_position - result.goal).norm();
    result.contact_events = sim.contact_events();
    result.sim_time = sim.elapsed();
    result.map_rebuilds = twin.metrics().map_rebuilds;
    result.octree_voxels = twin.octree() ? twin.octree()->size() : 0;
    result.metrics = twin.metrics();
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
  };

  // Let the first pose and cloud land before commanding anything.
  sim.run_for(0.5);

  Path survey;
  survey.waypoints = lawnmower(config.survey_min, config.survey_max, config.survey_spacing, config.survey_depth);
  survey.cost = survey.recomputed_cost();
  twin.execute_path(survey);
  result.survey_done = follow(config.leg_timeout);
  result.survey_time = sim.elapsed();
  if (!result.survey_done) {
    result.failure = "survey did not finish";
    return finish();
  }

  twin.flush_map();
  const Vec3 here = sim.state().pose.position;
  const Vec2 centre = 0.5 * (config.survey_min + config.survey_max);
  Vec2 dir = centre - here.head<2>();
  if (dir.norm() < 1e-6) dir = Vec2::UnitX();
  dir.normalize();
  const Vec2 goal_xy = here.head<2>() + config.goal_distance * dir;
  result.goal = Vec3(goal_xy.x(), goal_xy.y(), config.goal_depth);

  try {
    twin.request_plan(result.goal, config.plan_budget, sim.now());
  } catch (const Error& e) {
    result.failure = std::string("plan request rejected: ") + e.what();
    return finish();
  }
  if (twin.mode() != Mode::Autonomous || !twin.active_path()) {
    result.failure = "planning failed: " + twin.last_error().dump();
    return finish();
  }
  result.plan_ok = true;
  result.path = *twin.active_path();

  const double transit_start = sim.elapsed();
  const bool done = follow(config.leg_timeout);
  result.transit_time = sim.elapsed() - transit_start;
  if (!done) {
    result.failure = "path following did not finish";
    return finish();
  }
  sim.run_for(config.settle_time);
  finish();
  result.arrived = result.final_error <= config.twin.goal_tolerance;
  if (!result.arrived) result.failure = "stopped outside the goal tolerance";
  return result;
}

}  // namespace uwtwin
