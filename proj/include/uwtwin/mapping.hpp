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

#include <optional>
#include <vector>

#include <json.hpp>

#include "uwtwin/kernels.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {

/// Gridded seafloor reconstructed from a sparse cloud. Cell (ix, iy) covers
/// [origin + cell_size * (ix, iy), origin + cell_size * (ix + 1, iy + 1)).
/// Unknown cells hold NaN.
struct DenseSurface {
  Vec2 origin = Vec2::Zero();
  double cell_size = 0.25;
  int nx = 0;
  int ny = 0;
  std::vector<double> z;
  Timestamp stamp;

  std::optional<double> at(int ix, int iy) const;
  bool defined(int ix, int iy) const;
  Vec2 cell_center(int ix, int iy) const { return origin + cell_size * Vec2(ix + 0.5, iy + 0.5); }
  std::size_t defined_count() const;
  double min_defined() const;
  double max_defined() const;
};

struct DensifyParams {
  double cell_size = 0.25;
  int max_fill_distance = 4;  // cells, Chebyshev
};

/// Mean-of-samples binning followed by capped IDW hole filling.
/// Throws EmptyInput for an empty cloud, ParamError for cell_size <= 0.
DenseSurface densify(const PointCloud& cloud, double cell_size, int max_fill_distance,
                     kernels::Exec exec = kernels::Exec::Parallel);
inline DenseSurface densify(const PointCloud& cloud, const DensifyParams& p,
                            kernels::Exec exec = kernels::Exec::Parallel) {
  return densify(cloud, p.cell_size, p.max_fill_distance, exec);
}

/// One point per defined cell at its centre.
PointCloud surface_to_cloud(const DenseSurface& surface);

nlohmann::json surface_to_json(const DenseSurface& surface);

/// Appends clouds in order; stamps the result with the latest stamp.
PointCloud concatenate(const std::vector<PointCloud>& clouds);

}  // namespace uwtwin
