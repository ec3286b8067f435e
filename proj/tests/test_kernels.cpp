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
#include "oracles.hpp"
#include "uwtwin/kernels.hpp"
#include "uwtwin/mapping.hpp"

namespace uwtwin::kernels {
namespace {

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

TEST(Kernels, RaycastBatchSerialEqualsParallel) {
  const auto map = generate_harbor(7);
  std::mt19937_64 rng(1);
  std::vector<Vec3> dirs;
  for (int i = 0; i < 4000; ++i) {
    Vec3 d = testgen::random_vec(rng, 1.0);
    d.z() = -std::abs(d.z()) - 0.1;
    dirs.push_back(d.normalized());
  }
  const Vec3 origin(30, 30, -4);
  const auto s = raycast_batch(map, origin, dirs, 12.0, Exec::Serial);
  const auto p = raycast_batch(map, origin, dirs, 12.0, Exec::Parallel);
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) ASSERT_TRUE(same(s[i], p[i])) << i;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = raycast_heightmap(map, origin, dirs[i], 12.0);
    ASSERT_TRUE(same(s[i], r ? *r : kMiss));
  }
}

TEST(Kernels, RaycastHitsFlatFloorAtExactRange) {
  const auto m = Heightmap::constant(Vec2(-10, -10), 1.0, 21, 21, -10.0);
  const auto r = raycast_heightmap(m, Vec3(0, 0, -2), Vec3(0, 0, -1), 12.0);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 8.0, 1e-12);
  EXPECT_FALSE(raycast_heightmap(m, Vec3(0, 0, -2), Vec3(0, 0, -1), 5.0).has_value());
  EXPECT_FALSE(raycast_heightmap(m, Vec3(0, 0, -2), Vec3(0, 0, 1), 50.0).has_value());
}

TEST(Kernels, DepthRenderSerialEqualsParallel) {
  const auto map = generate_harbor(3);
  const Quat q(Eigen::AngleAxisd(0.7, Vec3::UnitZ()));
  const PinholeSpec cam;
  EXPECT_EQ(depth_render(map, Vec3(20, 25, -6), q, cam, Exec::Serial),
            depth_render(map, Vec3(20, 25, -6), q, cam, Exec::Parallel));
}

TEST(Kernels, IdwFillSerialEqualsParallelAndOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int nx = 90, ny = 70;
  std::vector<double> grid(nx * ny, kMiss);
  for (auto& g : grid) {
    if (u(rng) < 0.05) g = -10.0 + 4.0 * u(rng);
  }
  for (int fill : {0, 1, 4, 7}) {
    const auto s = idw_fill(grid, nx, ny, fill, Exec::Serial);
    const auto p = idw_fill(grid, nx, ny, fill, Exec::Parallel);
    const auto o = oracle::idw(grid, nx, ny, fill);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ASSERT_TRUE(same(s[i], p[i]));
      ASSERT_EQ(std::isnan(s[i]), std::isnan(o[i]));
      if (!std::isnan(o[i])) ASSERT_NEAR(s[i], o[i], 1e-9);
    }
  }
  EXPECT_THROW(idw_fill(grid, nx, ny, 16, Exec::Serial), ParamError);
  EXPECT_THROW(idw_fill(grid, nx, ny, -1, Exec::Serial), ParamError);
}

TEST(Kernels, AnyBoxWithinSerialEqualsParallel) {
  std::mt19937_64 rng(2);
  std::vector<Aabb> boxes;
  for (int i = 0; i < 3000; ++i) {
    const Vec3 c = testgen::random_vec(rng, 20.0);
    boxes.push_back({c, c + Vec3::Constant(0.25)});
  }
  std::uniform_real_distribution<double> r(0.05, 1.5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 c = testgen::random_vec(rng, 20.0);
    const double rad = r(rng);
    const bool s = any_box_within(boxes, c, rad, Exec::Serial);
    ASSERT_EQ(s, any_box_within(boxes, c, rad, Exec::Parallel));
    bool o = false;
    for (const auto& b : boxes) o = o || oracle::point_box_distance(c, b.min, b.max) <= rad;
    ASSERT_EQ(s, o);
  }
}

TEST(Kernels, DensifySerialEqualsParallel) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  PointCloud c;
  for (int i = 0; i < 5000; ++i) c.points.push_back(Point3f::from_vec(Vec3(u(rng), u(rng), -u(rng) / 3 - 1)));
  EXPECT_EQ(densify(c, 0.25, 4, Exec::Serial).z.size(), densify(c, 0.25, 4, Exec::Parallel).z.size());
  const auto a = densify(c, 0.25, 4, Exec::Serial).z;
  const auto b = densify(c, 0.25, 4, Exec::Parallel).z;
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_TRUE(same(a[i], b[i]));
}

}  // namespace
}  // namespace uwtwin::kernels
