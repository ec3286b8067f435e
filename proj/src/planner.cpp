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

#include "uwtwin/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "uwtwin/kernels.hpp"

namespace uwtwin {

void PlannerParams::validate() const {
  if (!(step_eta > 0.0)) throw ParamError("step_eta must be > 0");
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) throw ParamError("goal_bias must lie in [0, 1]");
  if (!(rewire_gamma > 0.0)) throw ParamError("rewire_gamma must be > 0");
  if (max_iterations == 0) throw ParamError("max_iterations must be >= 1");
}

bool check_sphere(const Vec3& center, double radius, const OccupancyOctree& tree) {
  if (tree.empty()) return false;
  const double reach = radius + tree.resolution();
  const Vec3 lo = (center.array() - reach - tree.bounds().min.array()) / tree.resolution();
  const Vec3 hi = (center.array() + reach - tree.bounds().min.array()) / tree.resolution();
  const auto& dims = tree.key_dims();
  OctreeKey klo;
  OctreeKey khi;
  for (int i = 0; i < 3; ++i) {
    const double top = double(dims[i]) - 1.0;
    if (hi[i] < 0.0 || lo[i] > top) return false;
    const auto a = static_cast<std::uint32_t>(std::clamp(std::floor(lo[i]), 0.0, top));
    const auto b = static_cast<std::uint32_t>(std::clamp(std::floor(hi[i]), 0.0, top));
    (i == 0 ? klo.ix : i == 1 ? klo.iy : klo.iz) = a;
    (i == 0 ? khi.ix : i == 1 ? khi.iy : khi.iz) = b;
  }
  const double r2 = radius * radius;
  return tree.visit_range(klo, khi, [&](const OctreeKey& k) {
    return kernels::box_distance_squared(tree.voxel_box(k), center) <= r2;
  });
}

bool check_segment(const Vec3& a, const Vec3& b, double radius, const OccupancyOctree& tree) {
  if (tree.empty()) return false;
  const double length = (b - a).norm();
  const double max_spacing = tree.resolution() * 0.5;
  const auto steps = static_cast<std::size_t>(std::ceil(length / max_spacing));
  if (steps == 0) return check_sphere(a, radius, tree);
  const double h = length / static_cast<double>(steps);
  const double inflated = radius + 0.5 * h;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    if (check_sphere(a + t * (b - a), inflated, tree)) return true;
  }
  return false;
}

double neighbor_radius(std::size_t n, const PlannerParams& params) {
  if (n < 2) return params.step_eta;
  const double dn = static_cast<double>(n);
  return std::min(params.rewire_gamma * std::cbrt(std::log(dn) / dn), params.step_eta);
}

namespace {

// Incremental (unbalanced) k-d tree over planner node positions with
// deterministic tie-breaking on node index.
class KdIndex {
 public:
  explicit KdIndex(const std::vector<Vec3>& points) : points_(points) {}

  void insert(std::int32_t id) {
    left_.push_back(-1);
    right_.push_back(-1);
    axis_.push_back(0);
    if (root_ < 0) {
      root_ = id;
      return;
    }
    std::int32_t node = root_;
    int depth = 0;
    while (true) {
      const int ax = depth % 3;
      auto& next = points_[id][ax] < points_[node][ax] ? left_[node] : right_[node];
      if (next < 0) {
        next = id;
        axis_[id] = static_cast<std::uint8_t>((depth + 1) % 3);
        return;
      }
      node = next;
      ++depth;
    }
  }

  std::int32_t nearest(const Vec3& q) const {
    std::int32_t best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_rec(root_, q, best, best_d2);
    return best;
  }

  void within(const Vec3& q, double r, std::vector<std::int32_t>& out) const {
    out.clear();
    within_rec(root_, q, r * r, r, out);
    std::sort(out.begin(), out.end());
  }

 private:
  void nearest_rec(std::int32_t node, const Vec3& q, std::int32_t& best, double& best_d2) const {
    if (node < 0) return;
    const double d2 = (points_[node] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && node < best)) {
      best = node;
      best_d2 = d2;
    }
    const int ax = axis_[node];
    const double diff = q[ax] - points_[node][ax];
    const std::int32_t near_side = diff < 0 ? left_[node] : right_[node];
    const std::int32_t far_side = diff < 0 ? right_[node] : left_[node];
    nearest_rec(near_side, q, best, best_d2);
    if (diff * diff <= best_d2) nearest_rec(far_side, q, best, best_d2);
  }

  void within_rec(std::int32_t node, const Vec3& q, double r2, double r, std::vector<std::int32_t>& out) const {
    if (node < 0) return;
    if ((points_[node] - q).squaredNorm() <= r2) out.push_back(node);
    const int ax = axis_[node];
    const double diff = q[ax] - points_[node][ax];
    if (diff - r < 0) within_rec(left_[node], q, r2, r, out);
    if (diff + r >= 0) within_rec(right_[node], q, r2, r, out);
  }

  const std::vector<Vec3>& points_;
  std::vector<std::int32_t> left_;
  std::vector<std::int32_t> right_;
  std::vector<std::uint8_t> axis_;
  std::int32_t root_ = -1;
};

struct SearchTree {
  std::vector<Vec3> pos;
  std::vector<std::int32_t> parent;
  std::vector<double> cost;
  std::vector<std::vector<std::int32_t>> children;

  std::int32_t add(const Vec3& p, std::int32_t par, double c) {
    const auto id = static_cast<std::int32_t>(pos.size());
    pos.push_back(p);
    parent.push_back(par);
    cost.push_back(c);
    children.emplace_back();
    if (par >= 0) children[par].push_back(id);
    return id;
  }

  void reparent(std::int32_t node, std::int32_t new_parent, double new_cost) {
    auto& siblings = children[parent[node]];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    parent[node] = new_parent;
    children[new_parent].push_back(node);
    const double delta = new_cost - cost[node];
    cost[node] = new_cost;
    std::vector<std::int32_t> stack(children[node].begin(), children[node].end());
    while (!stack.empty()) {
      const auto n = stack.back();
      stack.pop_back();
      cost[n] += delta;
      stack.insert(stack.end(), children[n].begin(), children[n].end());
    }
  }
};

}  // namespace

Path plan(const PlanRequest& req, const OccupancyOctree& tree, const PlannerParams& params, PlannerId variant,
          PlanTrace* trace, const std::atomic<bool>* cancel) {
  params.validate();
  if (!(req.robot_radius > 0.0)) throw ParamError("robot_radius must be > 0");
  if (!(req.time_budget > 0.0)) throw ParamError("time_budget must be > 0");
  if (!(req.goal_tolerance > 0.0)) throw ParamError("goal_tolerance must be > 0");
  if (!req.bounds.contains_closed(req.start) || !req.bounds.contains_closed(req.goal)) {
    throw ParamError("start and goal must lie within the planning bounds");
  }
  if (check_sphere(req.start, req.robot_radius, tree)) throw StartInCollision();
  if (check_sphere(req.goal, req.robot_radius, tree)) throw GoalInCollision();

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  if ((req.goal - req.start).norm() <= req.goal_tolerance) {
    Path trivial;
    trivial.waypoints = {req.start};
    trivial.planner_id = variant;
    trivial.request_id = req.request_id;
    trivial.elapsed = elapsed();
    if (trace) *trace = PlanTrace{{{0, 0.0}}, 1, 1};
    return trivial;
  }

  SearchTree st;
  KdIndex index(st.pos);
  st.add(req.start, -1, 0.0);
  index.insert(0);

  std::mt19937_64 rng(req.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 span = req.bounds.extent();
  const bool star = variant == PlannerId::RrtStar;

  std::vector<std::int32_t> goal_nodes;
  std::vector<std::int32_t> near;
  std::vector<std::pair<double, std::int32_t>> candidates;
  double best_cost = std::numeric_limits<double>::infinity();
  PlanTrace local_trace;

  auto refresh_best = [&](std::uint64_t iteration) {
    double b = std::numeric_limits<double>::infinity();
    for (auto g : goal_nodes) b = std::min(b, st.cost[g]);
    if (b < best_cost) {
      best_cost = b;
      local_trace.best_cost.push_back({iteration, b});
    }
  };

  std::uint64_t iteration = 0;
  while (iteration < params.max_iterations) {
    if ((iteration & 31U) == 0 && elapsed() >= req.time_budget) break;
    if (cancel && cancel->load(std::memory_order_relaxed)) break;
    ++iteration;

    Vec3 sample;
    if (unit(rng) < params.goal_bias) {
      sample = req.goal;
    } else {
      const double ux = unit(rng);
      const double uy = unit(rng);
      const double uz = unit(rng);
      sample = req.bounds.min + Vec3(ux * span.x(), uy * span.y(), uz * span.z());
    }

    const std::int32_t nearest = index.nearest(sample);
    const Vec3 from = st.pos[nearest];
    const Vec3 delta = sample - from;
    const double dist = delta.norm();
    if (dist == 0.0) continue;
    const Vec3 next = dist <= params.step_eta ? sample : Vec3(from + delta * (params.step_eta / dist));
    if (check_segment(from, next, req.robot_radius, tree)) continue;

    std::int32_t parent = nearest;
    double cost = st.cost[nearest] + (next - from).norm();
    if (star) {
      index.within(next, neighbor_radius(st.pos.size() + 1, params), near);
      candidates.clear();
      for (auto j : near) {
        if (j == nearest) continue;
        const double c = st.cost[j] + (next - st.pos[j]).norm();
        if (c < cost) candidates.emplace_back(c, j);
      }
      std::sort(candidates.begin(), candidates.end());
      for (const auto& [c, j] : candidates) {
        if (st.pos[j] == next) continue;
        if (!check_segment(st.pos[j], next, req.robot_radius, tree)) {
          parent = j;
          cost = c;
          break;
        }
      }
    }
    const std::int32_t id = st.add(next, parent, cost);
    index.insert(id);

    bool changed = false;
    if (star) {
      for (auto j : near) {
        if (j == parent) continue;
        const double d = (st.pos[j] - next).norm();
        if (d == 0.0) continue;
        const double c = cost + d;
        if (c < st.cost[j] && !check_segment(next, st.pos[j], req.robot_radius, tree)) {
          st.reparent(j, id, c);
          changed = true;
        }
      }
    }
    if ((next - req.goal).norm() <= req.goal_tolerance) {
      goal_nodes.push_back(id);
      changed = true;
    }
    if (changed && !goal_nodes.empty()) refresh_best(iteration);
  }

  const double spent = elapsed();
  local_trace.tree_size = st.pos.size();
  local_trace.goal_nodes = goal_nodes.size();
  if (trace) *trace = local_trace;
  if (goal_nodes.empty()) throw NoPathFound(iteration, spent);

  std::int32_t best = goal_nodes.front();
  for (auto g : goal_nodes) {
    if (st.cost[g] < st.cost[best]) best = g;
  }
  Path path;
  for (std::int32_t n = best; n >= 0; n = st.parent[n]) path.waypoints.push_back(st.pos[n]);
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  if (path.waypoints.back() != req.goal && !check_segment(path.waypoints.back(), req.goal, req.robot_radius, tree)) {
    path.waypoints.push_back(req.goal);
  }
  path.cost = path.recomputed_cost();
  path.planner_id = variant;
  path.iterations = iteration;
  path.elapsed = spent;
  path.request_id = req.request_id;
  return path;
}

}  // namespace uwtwin
