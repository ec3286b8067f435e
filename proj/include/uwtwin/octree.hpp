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

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "uwtwin/common.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {

struct OctreeKey {
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;
  std::uint32_t iz = 0;
  friend auto operator<=>(const OctreeKey&, const OctreeKey&) = default;
};

struct InsertStats {
  std::size_t inserted = 0;  // points that landed in bounds
  std::size_t skipped = 0;   // out-of-bounds points
};

/// Binary-occupancy 8-ary tree over a fixed box. Leaves live at max_depth and
/// have edge length `resolution`; key(p) = floor((p - bounds.min) / res).
class OccupancyOctree {
 public:
  static constexpr int kMaxDepth = 16;

  OccupancyOctree(double resolution, const Aabb& bounds);

  double resolution() const { return resolution_; }
  const Aabb& bounds() const { return bounds_; }
  int max_depth() const { return depth_; }
  const std::array<std::uint32_t, 3>& key_dims() const { return dims_; }

  std::optional<OctreeKey> key_of(const Vec3& p) const;
  Aabb voxel_box(const OctreeKey& k) const;

  InsertStats insert_cloud(const PointCloud& cloud);
  bool insert_key(const OctreeKey& k);

  bool is_occupied(const Vec3& p) const;
  bool contains(const OctreeKey& k) const;
  std::size_t size() const { return leaf_count_; }
  bool empty() const { return leaf_count_ == 0; }

  /// Keys in ascending (ix, iy, iz) order, recovered by walking the tree.
  std::vector<OctreeKey> keys() const;

  /// Visits every occupied leaf whose key lies in [lo, hi] (inclusive).
  /// The visitor returns true to stop early; the call returns true if it did.
  template <typename Visitor>
  bool visit_range(const OctreeKey& lo, const OctreeKey& hi, Visitor&& visit) const {
    if (leaf_count_ == 0) return false;
    return visit_node(0, 0, OctreeKey{}, lo, hi, visit);
  }

  nlohmann::json to_json() const;
  static OccupancyOctree from_json(const nlohmann::json& j);

  std::size_t node_count() const { return nodes_.size(); }

  friend bool operator==(const OccupancyOctree& a, const OccupancyOctree& b);

 private:
  using Node = std::array<std::int32_t, 8>;
  static constexpr std::int32_t kNone = -1;

  static int child_slot(const OctreeKey& k, int shift) {
    return static_cast<int>(((k.ix >> shift) & 1U) | (((k.iy >> shift) & 1U) << 1) |
                            (((k.iz >> shift) & 1U) << 2));
  }

  template <typename Visitor>
  bool visit_node(std::int32_t node, int level, OctreeKey base, const OctreeKey& lo, const OctreeKey& hi,
                  Visitor& visit) const {
    const std::uint32_t span = 1U << (depth_ - level);
    if (base.ix > hi.ix || base.iy > hi.iy || base.iz > hi.iz) return false;
    if (base.ix + span - 1 < lo.ix || base.iy + span - 1 < lo.iy || base.iz + span - 1 < lo.iz) return false;
    if (level == depth_) return visit(base);
    const std::uint32_t half = span >> 1;
    for (int c = 0; c < 8; ++c) {
      const std::int32_t child = nodes_[node][c];
      if (child == kNone) continue;
      OctreeKey b{base.ix + ((c & 1) ? half : 0), base.iy + ((c & 2) ? half : 0), base.iz + ((c & 4) ? half : 0)};
      if (visit_node(child, level + 1, b, lo, hi, visit)) return true;
    }
    return false;
  }

  void collect(std::int32_t node, int level, OctreeKey base, std::vector<OctreeKey>& out) const;

  double resolution_;
  Aabb bounds_;
  std::array<std::uint32_t, 3> dims_{};
  int depth_ = 1;
  std::vector<Node> nodes_;
  std::size_t leaf_count_ = 0;
};

/// Value-semantics form: returns `tree` with the cloud merged in.
OccupancyOctree insert_cloud(OccupancyOctree tree, const PointCloud& cloud);

bool is_occupied(const OccupancyOctree& tree, const Vec3& p);

}  // namespace uwtwin
