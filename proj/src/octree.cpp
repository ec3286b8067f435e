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

#include "uwtwin/octree.hpp"

#include <algorithm>
#include <cmath>

namespace uwtwin {

OccupancyOctree::OccupancyOctree(double resolution, const Aabb& bounds) : resolution_(resolution), bounds_(bounds) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ParamError("octree resolution must be > 0");
  if (!bounds.min.allFinite() || !bounds.max.allFinite() || !(bounds.max.array() > bounds.min.array()).all()) {
    throw ParamError("octree bounds must be a non-empty finite box");
  }
  std::uint32_t widest = 1;
  for (int i = 0; i < 3; ++i) {
    const double cells = std::ceil(bounds.extent()[i] / resolution);
    if (cells > double(1U << kMaxDepth)) throw ParamError("octree would exceed max depth 16");
    dims_[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(cells));
    widest = std::max(widest, dims_[i]);
  }
  depth_ = 1;
  while ((1U << depth_) < widest) ++depth_;
  nodes_.push_back(Node{kNone, kNone, kNone, kNone, kNone, kNone, kNone, kNone});
}

std::optional<OctreeKey> OccupancyOctree::key_of(const Vec3& p) const {
  if (!p.allFinite() || !bounds_.contains(p)) return std::nullopt;
  const Vec3 g = (p - bounds_.min) / resolution_;
  OctreeKey k{static_cast<std::uint32_t>(std::floor(g.x())), static_cast<std::uint32_t>(std::floor(g.y())),
              static_cast<std::uint32_t>(std::floor(g.z()))};
  if (k.ix >= dims_[0] || k.iy >= dims_[1] || k.iz >= dims_[2]) return std::nullopt;
  return k;
}

Aabb OccupancyOctree::voxel_box(const OctreeKey& k) const {
  const Vec3 lo = bounds_.min + resolution_ * Vec3(k.ix, k.iy, k.iz);
  return {lo, lo.array() + resolution_};
}

bool OccupancyOctree::insert_key(const OctreeKey& k) {
  std::int32_t node = 0;
  bool created = false;
  for (int level = 0; level < depth_; ++level) {
    const int slot = child_slot(k, depth_ - 1 - level);
    std::int32_t child = nodes_[node][slot];
    if (child == kNone) {
      child = static_cast<std::int32_t>(nodes_.size());
      nodes_.push_back(Node{kNone, kNone, kNone, kNone, kNone, kNone, kNone, kNone});
      nodes_[node][slot] = child;
      created = true;
    }
    node = child;
  }
  if (created) ++leaf_count_;
  return created;
}

InsertStats OccupancyOctree::insert_cloud(const PointCloud& cloud) {
  InsertStats stats;
  for (const auto& p : cloud.points) {
    if (auto k = key_of(p.to_vec())) {
      insert_key(*k);
      ++stats.inserted;
    } else {
      ++stats.skipped;
    }
  }
  return stats;
}

bool OccupancyOctree::contains(const OctreeKey& k) const {
  if (k.ix >= dims_[0] || k.iy >= dims_[1] || k.iz >= dims_[2]) return false;
  std::int32_t node = 0;
  for (int level = 0; level < depth_; ++level) {
    node = nodes_[node][child_slot(k, depth_ - 1 - level)];
    if (node == kNone) return false;
  }
  return true;
}

bool OccupancyOctree::is_occupied(const Vec3& p) const {
  const auto k = key_of(p);
  return k && contains(*k);
}

void OccupancyOctree::collect(std::int32_t node, int level, OctreeKey base, std::vector<OctreeKey>& out) const {
  if (level == depth_) {
    out.push_back(base);
    return;
  }
  const std::uint32_t half = 1U << (depth_ - level - 1);
  for (int c = 0; c < 8; ++c) {
    const std::int32_t child = nodes_[node][c];
    if (child == kNone) continue;
    collect(child, level + 1,
            OctreeKey{base.ix + ((c & 1) ? half : 0), base.iy + ((c & 2) ? half : 0), base.iz + ((c & 4) ? half : 0)},
            out);
  }
}

std::vector<OctreeKey> OccupancyOctree::keys() const {
  std::vector<OctreeKey> out;
  out.reserve(leaf_count_);
  if (leaf_count_ > 0) collect(0, 0, OctreeKey{}, out);
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json OccupancyOctree::to_json() const {
  nlohmann::json keys_json = nlohmann::json::array();
  for (const auto& k : keys()) keys_json.push_back({k.ix, k.iy, k.iz});
  return {{"resolution", resolution_},
          {"bounds",
           {{"min", {bounds_.min.x(), bounds_.min.y(), bounds_.min.z()}},
            {"max", {bounds_.max.x(), bounds_.max.y(), bounds_.max.z()}}}},
          {"keys", std::move(keys_json)}};
}

OccupancyOctree OccupancyOctree::from_json(const nlohmann::json& j) {
  try {
    const auto& b = j.at("bounds");
    auto vec = [](const nlohmann::json& v) { return Vec3(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()); };
    OccupancyOctree tree(j.at("resolution").get<double>(), Aabb{vec(b.at("min")), vec(b.at("max"))});
    for (const auto& k : j.at("keys")) {
      OctreeKey key{k.at(0).get<std::uint32_t>(), k.at(1).get<std::uint32_t>(), k.at(2).get<std::uint32_t>()};
      if (key.ix >= tree.dims_[0] || key.iy >= tree.dims_[1] || key.iz >= tree.dims_[2]) {
        throw ParamError("octree key outside bounds");
      }
      tree.insert_key(key);
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("bad octree JSON: ") + e.what());
  }
}

bool operator==(const OccupancyOctree& a, const OccupancyOctree& b) {
  return a.resolution_ == b.resolution_ && a.bounds_ == b.bounds_ && a.keys() == b.keys();
}

OccupancyOctree insert_cloud(OccupancyOctree tree, const PointCloud& cloud) {
  tree.insert_cloud(cloud);
  return tree;
}

bool is_occupied(const OccupancyOctree& tree, const Vec3& p) { return tree.is_occupied(p); }

}  // namespace uwtwin
