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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "uwtwin/envsim.hpp"

namespace uwtwin {
namespace {

// ½mv² + ½ωᵀIω, written out rather than borrowed from the library.
double energy_oracle(const VehicleState& s, const VehicleParams& p) {
  const Vec3& v = s.twist.linear;
  const Vec3& w = s.twist.angular;
  return 0.5 * p.mass * (v.x() * v.x() + v.y() * v.y() + v.z() * v.z()) +
         0.5 * (p.inertia_diag.x() * w.x() * w.x() + p.inertia_diag.y() * w.y() * w.y() +
                p.inertia_diag.z() * w.z() * w.z());
}

VehicleParams frictionless(double mass) {
  VehicleParams p;
  p.mass = mass;
  p.drag_lin = Vec3::Zero();
  p.drag_ang = Vec3::Zero();
  p.buoyancy_force = p.weight_force = mass * 9.81;
  return p;
}

TEST(Dynamics, EquilibriumIsAFixedPoint) {
  VehicleState s;
  s.pose.position = Vec3(3.0, -2.0, -7.5);
  s.pose.orientation = Quat(Eigen::AngleAxisd(0.4, Vec3::UnitZ()));
  s.stamp = Timestamp::from_seconds(2.0);
  const VehicleParams p;
  const auto next = step_dynamics(s, Wrench{}, p, 0.01);
  EXPECT_EQ(next.pose.position, s.pose.position);
  EXPECT_EQ(next.pose.orientation.coeffs(), s.pose.orientation.coeffs());
  EXPECT_EQ(next.twist, s.twist);
  EXPECT_EQ(next.stamp.nanos, s.stamp.nanos + 10'000'000);
}

TEST(Dynamics, SemiImplicitOrderUnderConstantForce) {
  VehicleState s;
  Wrench w;
  w.force = Vec3(1.0, 0.0, 0.0);
  const auto next = step_dynamics(s, w, frictionless(10.0), 0.1);
  EXPECT_NEAR(next.twist.linear.x(), 0.01, 1e-12);
  EXPECT_NEAR(next.pose.position.x(), 0.001, 1e-12);
  EXPECT_NEAR(next.twist.linear.y(), 0.0, 1e-12);
  EXPECT_NEAR(next.pose.position.z(), 0.0, 1e-12);
}

TEST(Dynamics, DragStrictlyRemovesEnergy) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const VehicleParams p;
  for (int i = 0; i < 1000; ++i) {
    VehicleState s;
    s.pose.position = testgen::random_vec(rng, 20.0);
    s.pose.orientation = testgen::random_quat(rng);
    do {
      s.twist.linear = Vec3(u(rng), u(rng), u(rng));
      s.twist.angular = Vec3(u(rng), u(rng), u(rng));
    } while (s.twist.linear.norm() + s.twist.angular.norm() < 1e-3);
    const auto next = step_dynamics(s, Wrench{}, p, 0.01);
    ASSERT_LT(energy_oracle(next, p), energy_oracle(s, p)) << "state " << i;
    EXPECT_NEAR(kinetic_energy(s, p), energy_oracle(s, p), 1e-9);
  }
}

TEST(Dynamics, RejectsOutOfRangeStep) {
  const VehicleState s;
  const VehicleParams p;
  EXPECT_THROW(step_dynamics(s, Wrench{}, p, 0.0), ParamError);
  EXPECT_THROW(step_dynamics(s, Wrench{}, p, 0.11), ParamError);
  EXPECT_NO_THROW(step_dynamics(s, Wrench{}, p, 0.1));
}

TEST(Dynamics, FrictionlessVelocityIsConserved) {
  VehicleState s;
  s.twist.linear = Vec3(0.3, -0.2, 0.1);
  const auto p = frictionless(11.0);
  for (int i = 0; i < 5000; ++i) s = step_dynamics(s, Wrench{}, p, 0.01);
  EXPECT_EQ(s.twist.linear, Vec3(0.3, -0.2, 0.1));
}

TEST(Dynamics, QuaternionStaysUnitOverAMillionSteps) {
  VehicleState s;
  s.twist.angular = Vec3(0.7, -0.3, 1.1);
  auto p = frictionless(11.0);
  double worst = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    s = step_dynamics(s, Wrench{}, p, 0.01);
    worst = std::max(worst, std::abs(s.pose.orientation.norm() - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Dynamics, Deterministic) {
  std::mt19937_64 rng(9);
  std::vector<Wrench> log(500);
  for (auto& w : log) {
    w.force = testgen::random_vec(rng, 30.0);
    w.torque = testgen::random_vec(rng, 3.0);
  }
  auto run = [&] {
    VehicleState s;
    const VehicleParams p;
    for (const auto& w : log) s = step_dynamics(s, w, p, 0.01);
    return s;
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.pose, b.pose);
  EXPECT_EQ(a.twist, b.twist);
}

TEST(Heightmap, BilinearQueries) {
  auto flat = Heightmap::constant(Vec2(0, 0), 1.0, 5, 5, -10.0);
  EXPECT_DOUBLE_EQ(seafloor_depth(flat, Vec2(1.3, 2.7)), -10.0);
  EXPECT_DOUBLE_EQ(seafloor_depth(flat, Vec2(-50.0, 99.0)), -10.0);

  Heightmap m = Heightmap::constant(Vec2(0, 0), 1.0, 2, 2, -10.0);
  m.at(0, 1) = -12.0;
  m.at(1, 1) = -12.0;
  EXPECT_DOUBLE_EQ(seafloor_depth(m, Vec2(0.5, 0.5)), -11.0);
  EXPECT_DOUBLE_EQ(seafloor_depth(m, Vec2(1.0, 1.0)), -12.0);
  EXPECT_DOUBLE_EQ(seafloor_depth(m, Vec2(0.0, 0.0)), -10.0);
}

TEST(Heightmap, ValidateAndJsonRoundTrip) {
  auto m = generate_harbor(3);
  EXPECT_NO_THROW(m.validate());
  EXPECT_LT(m.max_depth(), 0.0);
  const auto back = heightmap_from_json(heightmap_to_json(m));
  EXPECT_EQ(back.nx, m.nx);
  EXPECT_EQ(back.depth, m.depth);

  auto bad = Heightmap::constant(Vec2(0, 0), 1.0, 3, 3, -1.0);
  bad.at(1, 1) = 0.5;
  EXPECT_THROW(bad.validate(), ParamError);
}

TEST(Heightmap, HarborIsSeedDeterministic) {
  EXPECT_EQ(generate_harbor(7).depth, generate_harbor(7).depth);
  EXPECT_NE(generate_harbor(7).depth, generate_harbor(8).depth);
}

TEST(GroundContact, Examples) {
  const auto m = Heightmap::constant(Vec2(-10, -10), 1.0, 21, 21, -10.0);
  VehicleParams p;
  p.collision_radius = 0.3;
  VehicleState s;
  s.pose.position = Vec3(0, 0, -5);
  EXPECT_FALSE(check_ground_contact(s, m, p));
  s.pose.position = Vec3(0, 0, -9.8);
  EXPECT_TRUE(check_ground_contact(s, m, p));
}

TEST(GroundContact, MatchesInequalityOracle) {
  auto m = generate_harbor(2);
  const VehicleParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xy(0.0, 60.0);
  std::uniform_real_distribution<double> z(-16.0, -8.0);
  for (int i = 0; i < 1000; ++i) {
    VehicleState s;
    s.pose.position = Vec3(xy(rng), xy(rng), z(rng));
    const bool oracle = s.pose.position.z() - p.collision_radius < seafloor_depth(m, s.pose.position.head<2>());
    ASSERT_EQ(check_ground_contact(s, m, p), oracle);
  }
}

TEST(GroundContact, ResolveClampsAndStopsDescent) {
  const auto m = Heightmap::constant(Vec2(-10, -10), 1.0, 21, 21, -10.0);
  const VehicleParams p;
  VehicleState s;
  s.pose.position = Vec3(0, 0, -10.2);
  s.twist.linear = Vec3(0.2, 0.0, -0.5);
  EXPECT_TRUE(resolve_ground_contact(s, m, p));
  EXPECT_DOUBLE_EQ(s.pose.position.z(), -10.0 + p.collision_radius);
  EXPECT_GE(s.world_velocity().z(), 0.0);
  EXPECT_NEAR(s.twist.linear.x(), 0.2, 1e-12);
  EXPECT_FALSE(check_ground_contact(s, m, p));
}

}  // namespace
}  // namespace uwtwin
