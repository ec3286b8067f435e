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

#include <atomic>
#include <cstdint>
#include <vector>

#include "uwtwin/messages.hpp"
#include "uwtwin/octree.hpp"

namespace uwtwin {

class StartInCollision : public Error {
 public:
  StartInCollision() : Error("plan start is in collision") {}
};

class GoalInCollision : public Error {
 public:
  GoalInCollision() : Error("plan goal is in collision") {}
};

class NoPathFound : public Error {
 public:
  NoPathFound(std::uint64_t iterations, double elapsed)
      : Error("no path found after " + std::to_string(iterations) + " iterations (" + std::to_string(elapsed) + " s)"),
        iterations_(iterations),
        elapsed_(elapsed) {}
  std::uint64_t iterations() const { return iterations_; }
  double elapsed() const { return elapsed_; }

 private:
  std::uint64_t iterations_;
  double elapsed_;
};

struct PlannerParams {
  double step_eta = 1.0;
  double goal_bias = 0.05;
  double rewire_gamma = 8.0;
  std::uint64_t max_iterations = 200000;

  void validate() const;
};

/// Exact sphere/box test against every occupied voxel whose key falls in the
/// cube of half-width radius + resolution around `center`.
bool check_sphere(const Vec3& center, double radius, const OccupancyOctree& tree);

/// Samples [a, b] at a uniform spacing h <= resolution / 2, endpoints
/// included, and tests each sample with radius + h / 2. The inflation makes
/// the sample spheres cover the whole swept volume of the radius-`radius`
/// sphere, so no contact between samples can be missed.
bool check_segment(const Vec3& a, const Vec3& b, double radius, const OccupancyOctree& tree);

/// RRT* neighbourhood radius for a tree of n nodes.
double neighbor_radius(std::size_t n, const PlannerParams& params);

struct CostCheckpoint {
  std::uint64_t iteration = 0;
  double best_cost = 0.0;
};

struct PlanTrace {
  std::vector<CostCheckpoint> best_cost;  // appended whenever the best goal cost changes
  std::size_t tree_size = 0;
  std::size_t goal_nodes = 0;
};

/// Time- and iteration-budgeted RRT / RRT* in 3-D position space.
/// Deterministic in req.rng_seed when the iteration cap binds first.
/// Throws StartInCollision, GoalInCollision, NoPathFound or ParamError.
Path plan(const PlanRequest& req, const OccupancyOctree& tree, const PlannerParams& params, PlannerId variant,
          PlanTrace* trace = nullptr, const std::atomic<bool>* cancel = nullptr);

}  // namespace uwtwin
