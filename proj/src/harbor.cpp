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

#include <algorithm>
#include <cmath>
#include <random>

#include "uwtwin/envsim.hpp"

namespace uwtwin {
namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of lattice value noise with its own random table.
class ValueNoise {
 public:
  ValueNoise(std::mt19937_64& rng, int cells_x, int cells_y, double pitch, Vec2 origin)
      : nx_(cells_x + 2), ny_(cells_y + 2), pitch_(pitch), origin_(origin), values_(nx_ * ny_) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : values_) v = u(rng);
  }

  double sample(const Vec2& p) const {
    const double gx = (p.x() - origin_.x()) / pitch_;
    const double gy = (p.y() - origin_.y()) / pitch_;
    const int ix = std::clamp(static_cast<int>(std::floor(gx)), 0, nx_ - 2);
    const int iy = std::clamp(static_cast<int>(std::floor(gy)), 0, ny_ - 2);
    const double fx = smoothstep(std::clamp(gx - ix, 0.0, 1.0));
    const double fy = smoothstep(std::clamp(gy - iy, 0.0, 1.0));
    auto v = [&](int x, int y) { return values_[static_cast<std::size_t>(y) * nx_ + x]; };
    return (1 - fy) * ((1 - fx) * v(ix, iy) + fx * v(ix + 1, iy)) +
           fy * ((1 - fx) * v(ix, iy + 1) + fx * v(ix + 1, iy + 1));
  }

 private:
  int nx_;
  int ny_;
  double pitch_;
  Vec2 origin_;
  std::vector<double> values_;
};

}  // namespace

Heightmap generate_harbor(std::uint64_t seed, const HarborSpec& spec) {
  if (!(spec.cell_size > 0.0) || !(spec.extent > spec.cell_size)) throw ParamError("bad harbor extent");
  if (spec.deepest + spec.relief >= 0.0) throw ParamError("harbor must stay below the surface");

  const int n = static_cast<int>(std::llround(spec.extent / spec.cell_size)) + 1;
  std::mt19937_64 rng(seed);
  std::vector<ValueNoise> octaves;
  double pitch = spec.base_wavelength;
  for (int o = 0; o < spec.octaves; ++o) {
    const int cells = static_cast<int>(std::ceil(spec.extent / pitch)) + 1;
    octaves.emplace_back(rng, cells, cells, pitch, spec.origin);
    pitch *= 0.5;
  }

  Heightmap map = Heightmap::constant(spec.origin, spec.cell_size, n, n, 0.0);
  std::vector<double> raw(map.depth.size());
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p = spec.origin + spec.cell_size * Vec2(ix, iy);
      double amp = 1.0;
      double sum = 0.0;
      for (const auto& oct : octaves) {
        sum += amp * oct.sample(p);
        amp *= 0.5;
      }
      raw[static_cast<std::size_t>(iy) * n + ix] = sum;
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double span = std::max(*hi - *lo, 1e-12);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    map.depth[i] = spec.deepest + spec.relief * (raw[i] - *lo) / span;
  }
  // Keep the shallowest node strictly below the surface after rounding.
  for (auto& d : map.depth) d = std::min(d, -1e-6);
  map.validate();
  return map;
}

}  // namespace uwtwin
