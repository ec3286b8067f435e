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

#include "uwtwin/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <omp.h>

namespace uwtwin::kernels {

int max_threads() { return omp_get_max_threads(); }

std::optional<double> raycast_heightmap(const Heightmap& map, const Vec3& origin, const Vec3& dir,
                                        double max_range) {
  auto gap = [&](double t) {
    const Vec3 p = origin + t * dir;
    return p.z() - seafloor_depth(map, p.head<2>());
  };
  if (gap(0.0) <= 0.0) return 0.0;

  const double step = map.cell_size * 0.25;
  double t_lo = 0.0;
  while (t_lo < max_range) {
    const double t_hi = std::min(t_lo + step, max_range);
    if (gap(t_hi) <= 0.0) {
      double lo = t_lo;
      double hi = t_hi;
      for (int i = 0; i < 100 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    t_lo = t_hi;
  }
  return std::nullopt;
}

std::vector<double> raycast_batch(const Heightmap& map, const Vec3& origin, std::span<const Vec3> dirs,
                                  double max_range, Exec exec) {
  std::vector<double> out(dirs.size(), kMiss);
  const auto n = static_cast<std::int64_t>(dirs.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      if (auto r = raycast_heightmap(map, origin, dirs[i], max_range)) out[i] = *r;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      if (auto r = raycast_heightmap(map, origin, dirs[i], max_range)) out[i] = *r;
    }
  }
  return out;
}

Vec3 pixel_direction(const PinholeSpec& cam, int col, int row) {
  const double focal = (cam.width / 2.0) / std::tan(cam.fov_half_angle);
  const Vec3 d((col + 0.5 - cam.width / 2.0) / focal, (row + 0.5 - cam.height / 2.0) / focal, -1.0);
  return d.normalized();
}

namespace {

std::uint8_t grey(double range, double max_range) {
  const double v = 255.0 * std::clamp(1.0 - range / max_range, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(v));
}

void render_row(const Heightmap& map, const Vec3& origin, const Quat& q, const PinholeSpec& cam, int row,
                std::uint8_t* out) {
  for (int col = 0; col < cam.width; ++col) {
    const Vec3 dir = q * pixel_direction(cam, col, row);
    const auto r = raycast_heightmap(map, origin, dir, cam.max_range);
    out[col] = r ? grey(*r, cam.max_range) : 0;
  }
}

double idw_cell(std::span<const double> grid, int nx, int ny, int max_fill, int ix, int iy) {
  struct Candidate {
    int d2;
    int x;
    int y;
  };
  std::array<Candidate, 32 * 32> buf;  // (2 * max_fill + 1)^2 is bounded by the caller
  std::size_t count = 0;
  const int x0 = std::max(0, ix - max_fill);
  const int x1 = std::min(nx - 1, ix + max_fill);
  const int y0 = std::max(0, iy - max_fill);
  const int y1 = std::min(ny - 1, iy + max_fill);
  for (int x = x0; x <= x1; ++x) {
    for (int y = y0; y <= y1; ++y) {
      const double v = grid[static_cast<std::size_t>(y) * nx + x];
      if (std::isnan(v)) continue;
      const int dx = x - ix;
      const int dy = y - iy;
      buf[count++] = {dx * dx + dy * dy, x, y};
    }
  }
  if (count == 0) return kMiss;
  const auto less = [](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  };
  const std::size_t k = std::min<std::size_t>(count, kIdwNeighbors);
  std::partial_sort(buf.begin(), buf.begin() + k, buf.begin() + count, less);
  std::sort(buf.begin(), buf.begin() + k, less);
  double wsum = 0.0;
  double zsum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / buf[i].d2;
    wsum += w;
    zsum += w * grid[static_cast<std::size_t>(buf[i].y) * nx + buf[i].x];
  }
  return zsum / wsum;
}

}  // namespace

std::vector<std::uint8_t> depth_render(const Heightmap& map, const Vec3& origin, const Quat& orientation,
                                       const PinholeSpec& cam, Exec exec) {
  std::vector<std::uint8_t> img(static_cast<std::size_t>(cam.width) * cam.height, 0);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < cam.height; ++row) {
      render_row(map, origin, orientation, cam, row, img.data() + static_cast<std::size_t>(row) * cam.width);
    }
  } else {
    for (int row = 0; row < cam.height; ++row) {
      render_row(map, origin, orientation, cam, row, img.data() + static_cast<std::size_t>(row) * cam.width);
    }
  }
  return img;
}

std::vector<double> idw_fill(std::span<const double> grid, int nx, int ny, int max_fill, Exec exec) {
  if (max_fill < 0 || max_fill > 15) throw ParamError("max_fill_distance must lie in [0, 15]");
  std::vector<double> out(grid.begin(), grid.end());
  if (max_fill == 0) return out;
  const auto cells = static_cast<std::int64_t>(nx) * ny;
  auto fill = [&](std::int64_t i) {
    if (!std::isnan(grid[i])) return;
    const int ix = static_cast<int>(i % nx);
    const int iy = static_cast<int>(i / nx);
    out[i] = idw_cell(grid, nx, ny, max_fill, ix, iy);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < cells; ++i) fill(i);
  } else {
    for (std::int64_t i = 0; i < cells; ++i) fill(i);
  }
  return out;
}

bool any_box_within(std::span<const Aabb> boxes, const Vec3& center, double radius, Exec exec) {
  const double r2 = radius * radius;
  const auto n = static_cast<std::int64_t>(boxes.size());
  if (exec == Exec::Parallel) {
    int hit = 0;
#pragma omp parallel for reduction(| : hit) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      if (box_distance_squared(boxes[i], center) <= r2) hit = 1;
    }
    return hit != 0;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (box_distance_squared(boxes[i], center) <= r2) return true;
  }
  return false;
}

}  // namespace uwtwin::kernels
