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

#include "uwtwin/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uwtwin {

std::optional<double> DenseSurface::at(int ix, int iy) const {
  const double v = z[static_cast<std::size_t>(iy) * nx + ix];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

bool DenseSurface::defined(int ix, int iy) const {
  return !std::isnan(z[static_cast<std::size_t>(iy) * nx + ix]);
}

std::size_t DenseSurface::defined_count() const {
  return static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](double v) { return !std::isnan(v); }));
}

double DenseSurface::min_defined() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (!std::isnan(v)) m = std::min(m, v);
  }
  return m;
}

double DenseSurface::max_defined() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (!std::isnan(v)) m = std::max(m, v);
  }
  return m;
}

DenseSurface densify(const PointCloud& cloud, double cell_size, int max_fill_distance, kernels::Exec exec) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ParamError("cell_size must be > 0");
  if (cloud.points.empty()) throw EmptyInput("densify: empty point cloud");

  // Cells are aligned to the global lattice k * cell_size so that clouds
  // covering overlapping regions bin consistently.
  auto cell_index = [cell_size](double v) { return static_cast<std::int64_t>(std::floor(v / cell_size)); };
  std::int64_t kx0 = std::numeric_limits<std::int64_t>::max();
  std::int64_t ky0 = kx0;
  std::int64_t kx1 = std::numeric_limits<std::int64_t>::min();
  std::int64_t ky1 = kx1;
  for (const auto& p : cloud.points) {
    const auto kx = cell_index(p.x);
    const auto ky = cell_index(p.y);
    kx0 = std::min(kx0, kx);
    kx1 = std::max(kx1, kx);
    ky0 = std::min(ky0, ky);
    ky1 = std::max(ky1, ky);
  }

  DenseSurface s;
  s.cell_size = cell_size;
  s.origin = Vec2(static_cast<double>(kx0) * cell_size, static_cast<double>(ky0) * cell_size);
  s.nx = static_cast<int>(kx1 - kx0 + 1);
  s.ny = static_cast<int>(ky1 - ky0 + 1);
  s.stamp = cloud.stamp;

  const std::size_t cells = static_cast<std::size_t>(s.nx) * s.ny;
  std::vector<double> sum(cells, 0.0);
  std::vector<std::uint32_t> count(cells, 0);
  for (const auto& p : cloud.points) {
    const auto ix = cell_index(p.x) - kx0;
    const auto iy = cell_index(p.y) - ky0;
    const std::size_t i = static_cast<std::size_t>(iy) * s.nx + static_cast<std::size_t>(ix);
    sum[i] += p.z;
    ++count[i];
  }
  std::vector<double> binned(cells, kernels::kMiss);
  for (std::size_t i = 0; i < cells; ++i) {
    if (count[i] > 0) binned[i] = sum[i] / count[i];
  }
  s.z = kernels::idw_fill(binned, s.nx, s.ny, max_fill_distance, exec);
  return s;
}

PointCloud surface_to_cloud(const DenseSurface& surface) {
  PointCloud out;
  out.stamp = surface.stamp;
  out.points.reserve(surface.defined_count());
  for (int iy = 0; iy < surface.ny; ++iy) {
    for (int ix = 0; ix < surface.nx; ++ix) {
      if (auto z = surface.at(ix, iy)) {
        const Vec2 c = surface.cell_center(ix, iy);
        out.points.push_back(Point3f::from_vec(Vec3(c.x(), c.y(), *z)));
      }
    }
  }
  return out;
}

nlohmann::json surface_to_json(const DenseSurface& surface) {
  nlohmann::json z = nlohmann::json::array();
  for (double v : surface.z) {
    if (std::isnan(v)) {
      z.push_back(nullptr);
    } else {
      z.push_back(v);
    }
  }
  return {{"origin", {surface.origin.x(), surface.origin.y()}},
          {"cell_size", surface.cell_size},
          {"nx", surface.nx},
          {"ny", surface.ny},
          {"stamp_ns", surface.stamp.nanos},
          {"z", std::move(z)}};
}

PointCloud concatenate(const std::vector<PointCloud>& clouds) {
  PointCloud out;
  std::size_t total = 0;
  for (const auto& c : clouds) total += c.points.size();
  out.points.reserve(total);
  for (const auto& c : clouds) {
    out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    out.stamp = std::max(out.stamp, c.stamp);
  }
  return out;
}

}  // namespace uwtwin
