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

// Data-parallel inner loops. Every kernel takes an Exec policy; the Serial
// path is the reference the OpenMP path is tested against bit-for-bit.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "uwtwin/common.hpp"
#include "uwtwin/envsim.hpp"

namespace uwtwin::kernels {

enum class Exec { Serial, Parallel };

int max_threads();

inline constexpr double kMiss = std::numeric_limits<double>::quiet_NaN();

/// Distance along unit direction `dir` from `origin` to the first crossing
/// of the bilinear seafloor, or nullopt if none within max_range.
std::optional<double> raycast_heightmap(const Heightmap& map, const Vec3& origin, const Vec3& dir,
                                        double max_range);

/// One raycast per direction; misses are NaN.
std::vector<double> raycast_batch(const Heightmap& map, const Vec3& origin, std::span<const Vec3> dirs,
                                  double max_range, Exec exec);

struct PinholeSpec {
  int width = 320;
  int height = 240;
  double fov_half_angle = 0.6;  // across the horizontal half-width
  double max_range = 12.0;
};

/// Body-frame direction of pixel (col, row) for a camera looking along -z,
/// image columns along +x and rows along +y.
Vec3 pixel_direction(const PinholeSpec& cam, int col, int row);

/// Grey value 255·clamp(1 − range/max_range), 0 on miss, row-major.
std::vector<std::uint8_t> depth_render(const Heightmap& map, const Vec3& origin, const Quat& orientation,
                                       const PinholeSpec& cam, Exec exec);

inline constexpr int kIdwNeighbors = 8;

/// Fills NaN cells that lie within `max_fill` (Chebyshev, in cells) of a
/// defined cell with the inverse-square-distance weighted mean of the
/// nearest <= 8 defined cells in that window. Nearest ties go to the lower
/// (ix, iy). Defined input cells are copied through unchanged.
std::vector<double> idw_fill(std::span<const double> grid, int nx, int ny, int max_fill, Exec exec);

/// True iff any box lies within `radius` of `center` (closed test).
bool any_box_within(std::span<const Aabb> boxes, const Vec3& center, double radius, Exec exec);

inline double box_distance_squared(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace uwtwin::kernels
