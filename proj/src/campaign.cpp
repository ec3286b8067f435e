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

#include "uwtwin/campaign.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace uwtwin {

std::string_view to_string(ScenarioClass c) {
  switch (c) {
    case ScenarioClass::Simple: return "SIMPLE";
    case ScenarioClass::CollisionProne: return "COLLISION_PRONE";
    case ScenarioClass::NearFloor: return "NEAR_FLOOR";
  }
  return "SIMPLE";
}

std::optional<ScenarioClass> scenario_class_from_string(std::string_view s) {
  for (auto c : kAllClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

PlanningWorld build_planning_world(const Heightmap& map, const DensifyParams& dp, double resolution,
                                   kernels::Exec exec) {
  map.validate();
  const double cell = dp.cell_size;
  const Vec2 lo = map.origin;
  const Vec2 hi = map.max_corner();
  const long ix0 = static_cast<long>(std::ceil(lo.x() / cell - 0.5));
  const long iy0 = static_cast<long>(std::ceil(lo.y() / cell - 0.5));
  const long ix1 = static_cast<long>(std::floor(hi.x() / cell - 0.5));
  const long iy1 = static_cast<long>(std::floor(hi.y() / cell - 0.5));

  PointCloud survey;
  for (long iy = iy0; iy <= iy1; ++iy) {
    for (long ix = ix0; ix <= ix1; ++ix) {
      const Vec2 c((ix + 0.5) * cell, (iy + 0.5) * cell);
      survey.points.push_back(Point3f::from_vec(Vec3(c.x(), c.y(), seafloor_depth(map, c))));
    }
  }

  PlanningWorld w;
  w.map = map;
  w.surface = densify(survey, dp, exec);
  const Aabb octree_bounds{Vec3(lo.x() - 5.0, lo.y() - 5.0, map.min_depth() - 5.0),
                           Vec3(hi.x() + 5.0, hi.y() + 5.0, 0.0)};
  auto tree = std::make_shared<OccupancyOctree>(resolution, octree_bounds);
  tree->insert_cloud(surface_to_cloud(w.surface));
  w.octree = std::move(tree);
  w.plan_bounds = Aabb{Vec3(lo.x(), lo.y(), map.min_depth() - 0.5), Vec3(hi.x(), hi.y(), -0.5)};
  return w;
}

namespace {

double max_floor_along(const Heightmap& map, const Vec2& a, const Vec2& b) {
  const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (0.25 * map.cell_size))));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) top = std::max(top, seafloor_depth(map, a + (b - a) * (double(i) / n)));
  return top;
}

}  // namespace

std::vector<Trial> generate_trials(const PlanningWorld& world, ScenarioClass cls, std::size_t n, std::uint64_t seed,
                                   double robot_radius) {
  const auto& tree = *world.octree;
  const auto& b = world.plan_bounds;
  constexpr double margin = 2.0;
  const Vec2 lo = b.min.head<2>() + Vec2::Constant(margin);
  const Vec2 hi = b.max.head<2>() - Vec2::Constant(margin);

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(cls) + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double c) { return a + (c - a) * unit(rng); };

  double min_dist = 10.0;
  double max_dist = cls == ScenarioClass::Simple ? 40.0 : 30.0;

  std::vector<Trial> out;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > 200000 * std::max<std::size_t>(n, 1)) {
      throw ParamError("could not generate enough " + std::string(to_string(cls)) + " trials on this map");
    }
    const Vec2 s(uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()));
    const double theta = uniform(0.0, 2.0 * std::numbers::pi);
    const Vec2 g = s + uniform(min_dist, max_dist) * Vec2(std::cos(theta), std::sin(theta));
    if ((g.array() < lo.array()).any() || (g.array() > hi.array()).any()) continue;

    Trial t;
    t.cls = cls;
    const double fs = seafloor_depth(world.map, s);
    const double fg = seafloor_depth(world.map, g);
    switch (cls) {
      case ScenarioClass::Simple: {
        const double z_lo = max_floor_along(world.map, s, g) + 5.0;
        const double z_hi = b.max.z() - 0.5;
        if (z_lo > z_hi) continue;
        t.start = Vec3(s.x(), s.y(), uniform(z_lo, z_hi));
        t.goal = Vec3(g.x(), g.y(), uniform(z_lo, z_hi));
        break;
      }
      case ScenarioClass::CollisionProne:
        t.start = Vec3(s.x(), s.y(), fs + uniform(1.5, 3.0));
        t.goal = Vec3(g.x(), g.y(), fg + uniform(1.5, 3.0));
        break;
      case ScenarioClass::NearFloor:
        t.start = Vec3(s.x(), s.y(), fs + uniform(2.0, 4.0));
        t.goal = Vec3(g.x(), g.y(), fg + uniform(0.8, 1.0));
        break;
    }
    if (!b.contains_closed(t.start) || !b.contains_closed(t.goal)) continue;
    if (check_sphere(t.start, robot_radius, tree) || check_sphere(t.goal, robot_radius, tree)) continue;
    if (cls == ScenarioClass::CollisionProne && !check_segment(t.start, t.goal, robot_radius, tree)) continue;
    t.seed = rng();
    out.push_back(t);
  }
  return out;
}

std::string CampaignResult::to_csv() const {
  std::ostringstream os;
  os << "class,budget_s,trials,successes,rate,mean_cost_m,mean_iterations\n";
  for (const auto& r : rows) {
    os << fmt::format("{},{:g},{},{},{:.4f},{:.4f},{:.1f}\n", to_string(r.cls), r.budget, r.trials, r.successes,
                      r.rate, r.mean_cost, r.mean_iterations);
  }
  return os.str();
}

CampaignResult run_campaign(const PlanningWorld& world, const CampaignSpec& spec) {
  spec.params.validate();
  for (double budget : spec.budgets) {
    if (!(budget > 0.0)) throw ParamError("budgets must be positive");
  }
  const auto t0 = std::chrono::steady_clock::now();

  // All budgets see the same trials so rows are paired.
  std::vector<TrialResult> jobs;
  for (auto cls : spec.classes) {
    const auto trials = generate_trials(world, cls, spec.trials, spec.seed, spec.robot_radius);
    for (double budget : spec.budgets) {
      for (const auto& t : trials) {
        TrialResult r;
        r.trial = t;
        r.budget = budget;
        jobs.push_back(r);
      }
    }
  }

  auto run_one = [&](TrialResult& r) {
    PlanRequest req;
    req.start = r.trial.start;
    req.goal = r.trial.goal;
    req.robot_radius = spec.robot_radius;
    req.goal_tolerance = spec.goal_tolerance;
    req.bounds = world.plan_bounds;
    req.rng_seed = r.trial.seed;
    PlannerParams params = spec.params;
    if (spec.mode == BudgetMode::Iterations) {
      params.max_iterations = std::max<std::uint64_t>(1, std::llround(r.budget * spec.iterations_per_second));
      req.time_budget = 1e6;
    } else {
      req.time_budget = r.budget;
    }
    try {
      r.path = plan(req, *world.octree, params, spec.variant);
      r.success = true;
      r.iterations = r.path.iterations;
      r.elapsed = r.path.elapsed;
    } catch (const NoPathFound& e) {
      r.error = "NoPathFound";
      r.iterations = e.iterations();
      r.elapsed = e.elapsed();
    } catch (const StartInCollision&) {
      r.error = "StartInCollision";
    } catch (const GoalInCollision&) {
      r.error = "GoalInCollision";
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  if (spec.exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(jobs[static_cast<std::size_t>(i)]);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) run_one(jobs[static_cast<std::size_t>(i)]);
  }

  CampaignResult out;
  for (auto cls : spec.classes) {
    for (double budget : spec.budgets) {
      CampaignRow row;
      row.cls = cls;
      row.budget = budget;
      double cost_sum = 0.0;
      double iter_sum = 0.0;
      for (const auto& r : jobs) {
        if (r.trial.cls != cls || r.budget != budget) continue;
        ++row.trials;
        iter_sum += static_cast<double>(r.iterations);
        if (r.success) {
          ++row.successes;
          cost_sum += r.path.cost;
        }
      }
      row.rate = row.trials ? static_cast<double>(row.successes) / row.trials : 0.0;
      row.mean_cost = row.successes ? cost_sum / row.successes : std::numeric_limits<double>::quiet_NaN();
      row.mean_iterations = row.trials ? iter_sum / row.trials : 0.0;
      out.rows.push_back(row);
    }
  }
  out.trials = std::move(jobs);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace uwtwin
