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

// Reference implementations used only by tests. They are written from the
// behavioural definitions, without calling the code under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <variant>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "uwtwin/common.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin::oracle {

using Key = std::tuple<long, long, long>;

/// Voxel index of p in a grid anchored at bounds.min; nothing outside the
/// half-open box.
inline std::set<Key> quantize(const std::vector<Vec3>& points, const Aabb& bounds, double res) {
  std::set<Key> out;
  for (const auto& p : points) {
    if (!(p.x() >= bounds.min.x() && p.x() < bounds.max.x() && p.y() >= bounds.min.y() && p.y() < bounds.max.y() &&
          p.z() >= bounds.min.z() && p.z() < bounds.max.z())) {
      continue;
    }
    out.emplace(static_cast<long>(std::floor((p.x() - bounds.min.x()) / res)),
                static_cast<long>(std::floor((p.y() - bounds.min.y()) / res)),
                static_cast<long>(std::floor((p.z() - bounds.min.z()) / res)));
  }
  return out;
}

inline double point_box_distance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = p[i] < lo[i] ? lo[i] - p[i] : (p[i] > hi[i] ? p[i] - hi[i] : 0.0);
    d2 += e * e;
  }
  return std::sqrt(d2);
}

struct Violation {
  std::size_t segment = 0;
  Vec3 at = Vec3::Zero();
  double clearance = 0.0;
};

/// Samples every segment at `spacing` and reports each sample whose
/// distance to some occupied box is below `radius`.
inline std::vector<Violation> path_violations(const std::vector<Vec3>& waypoints, const std::vector<Aabb>& boxes,
                                              double radius, double spacing) {
  std::vector<Violation> out;
  auto probe = [&](std::size_t seg, const Vec3& p) {
    for (const auto& b : boxes) {
      const double d = point_box_distance(p, b.min, b.max);
      if (d < radius) {
        out.push_back({seg, p, d});
        return;
      }
    }
  };
  if (waypoints.size() == 1) probe(0, waypoints.front());
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    const Vec3 a = waypoints[s];
    const Vec3 b = waypoints[s + 1];
    // Only boxes near this segment can matter.
    const Vec3 lo = a.cwiseMin(b) - Vec3::Constant(radius + 1e-9);
    const Vec3 hi = a.cwiseMax(b) + Vec3::Constant(radius + 1e-9);
    std::vector<Aabb> near;
    for (const auto& bx : boxes) {
      if ((bx.max.array() >= lo.array()).all() && (bx.min.array() <= hi.array()).all()) near.push_back(bx);
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
    for (int i = 0; i <= n; ++i) {
      const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
      for (const auto& bx : near) {
        const double d = point_box_distance(p, bx.min, bx.max);
        if (d < radius) {
          out.push_back({s, p, d});
          break;
        }
      }
    }
  }
  return out;
}

/// Hole filling by inverse-square distance over the nearest (up to 8)
/// defined cells in a Chebyshev window; nearest ties ordered by (x, y).
// Fills lo/hi (when given) with the extremes of each filled cell's contributors.
inline std::vector<double> idw(const std::vector<double>& grid, int nx, int ny, int window,
                               std::vector<double>* lo = nullptr, std::vector<double>* hi = nullptr) {
  std::vector<double> out = grid;
  if (lo) lo->assign(grid.size(), std::nan(""));
  if (hi) hi->assign(grid.size(), std::nan(""));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      if (!std::isnan(grid[iy * nx + ix])) continue;
      std::vector<std::tuple<int, int, int>> c;  // d2, x, y
      for (int y = iy - window; y <= iy + window; ++y) {
        for (int x = ix - window; x <= ix + window; ++x) {
          if (x < 0 || y < 0 || x >= nx || y >= ny) continue;
          if (std::isnan(grid[y * nx + x])) continue;
          c.emplace_back((x - ix) * (x - ix) + (y - iy) * (y - iy), x, y);
        }
      }
      std::sort(c.begin(), c.end());
      if (c.size() > 8) c.resize(8);
      if (c.empty()) continue;
      double num = 0.0;
      double den = 0.0;
      double mn = grid[std::get<2>(c[0]) * nx + std::get<1>(c[0])];
      double mx = mn;
      for (auto [d2, x, y] : c) {
        const double z = grid[y * nx + x];
        num += z / d2;
        den += 1.0 / d2;
        mn = std::min(mn, z);
        mx = std::max(mx, z);
      }
      if (lo) (*lo)[iy * nx + ix] = mn;
      if (hi) (*hi)[iy * nx + ix] = mx;
      out[iy * nx + ix] = num / den;
    }
  }
  return out;
}

/// Applies snapshot deltas in order onto an initially empty view.
class DeltaFold {
 public:
  void apply(const nlohmann::json& delta) {
    state_["version"] = delta.at("version");
    for (const auto& [k, v] : delta.at("fields").items()) state_["fields"][k] = v;
  }
  std::string dump() const { return state_.dump(); }

  static std::string canonical(const nlohmann::json& full) {
    nlohmann::json s;
    s["version"] = full.at("version");
    s["fields"] = full.at("fields");
    return s.dump();
  }

 private:
  nlohmann::json state_ = {{"version", 0}, {"fields", nlohmann::json::object()}};
};

/// Sample mean and (n-1) standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v)};
}

/// Median with +inf for failed runs.
inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}


// Buckets boxes into 1 m xy columns so whole-map scans stay cheap.
class BoxGrid {
 public:
  explicit BoxGrid(std::vector<Aabb> boxes, double cell = 1.0) : boxes_(std::move(boxes)), cell_(cell) {
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const auto& b = boxes_[i];
      for (long x = col(b.min.x()); x <= col(b.max.x()); ++x) {
        for (long y = col(b.min.y()); y <= col(b.max.y()); ++y) cols_[{x, y}].push_back(i);
      }
    }
  }

  std::vector<Aabb> near(const Vec3& lo, const Vec3& hi) const {
    std::set<std::size_t> ids;
    for (long x = col(lo.x()); x <= col(hi.x()); ++x) {
      for (long y = col(lo.y()); y <= col(hi.y()); ++y) {
        auto it = cols_.find({x, y});
        if (it != cols_.end()) ids.insert(it->second.begin(), it->second.end());
      }
    }
    std::vector<Aabb> out;
    for (auto i : ids) {
      const auto& b = boxes_[i];
      if ((b.max.array() >= lo.array()).all() && (b.min.array() <= hi.array()).all()) out.push_back(b);
    }
    return out;
  }

 private:
  long col(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  std::vector<Aabb> boxes_;
  double cell_;
  std::map<std::pair<long, long>, std::vector<std::size_t>> cols_;
};

inline std::size_t count_violations(const std::vector<Vec3>& waypoints, const BoxGrid& grid, double radius,
                                    double spacing) {
  std::size_t n = 0;
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    const Vec3 lo = waypoints[s].cwiseMin(waypoints[s + 1]) - Vec3::Constant(radius + 1e-9);
    const Vec3 hi = waypoints[s].cwiseMax(waypoints[s + 1]) + Vec3::Constant(radius + 1e-9);
    n += path_violations({waypoints[s], waypoints[s + 1]}, grid.near(lo, hi), radius, spacing).size();
  }
  if (waypoints.size() == 1) {
    const Vec3 r = Vec3::Constant(radius);
    n += path_violations(waypoints, grid.near(waypoints[0] - r, waypoints[0] + r), radius, spacing).size();
  }
  return n;
}

// Field-by-field equality that does not lean on the library's operator==.
inline bool same_vec(const Vec3& a, const Vec3& b) { return a.x() == b.x() && a.y() == b.y() && a.z() == b.z(); }

inline bool same_payload(const Payload& a, const Payload& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<PointCloud>(&a)) {
    const auto& y = std::get<PointCloud>(b);
    if (x->stamp.nanos != y.stamp.nanos || x->seq != y.seq || x->points.size() != y.points.size()) return false;
    for (std::size_t i = 0; i < x->points.size(); ++i) {
      if (x->points[i].x != y.points[i].x || x->points[i].y != y.points[i].y || x->points[i].z != y.points[i].z) {
        return false;
      }
    }
    return true;
  }
  if (const auto* x = std::get_if<ImageFrame>(&a)) {
    const auto& y = std::get<ImageFrame>(b);
    return x->width == y.width && x->height == y.height && x->encoding == y.encoding && x->data == y.data &&
           x->stamp.nanos == y.stamp.nanos;
  }
  if (const auto* x = std::get_if<Pose>(&a)) {
    const auto& y = std::get<Pose>(b);
    return same_vec(x->position, y.position) && x->orientation.w() == y.orientation.w() &&
           x->orientation.x() == y.orientation.x() && x->orientation.y() == y.orientation.y() &&
           x->orientation.z() == y.orientation.z() && x->stamp.nanos == y.stamp.nanos && x->frame == y.frame;
  }
  if (const auto* x = std::get_if<Wrench>(&a)) {
    const auto& y = std::get<Wrench>(b);
    return same_vec(x->force, y.force) && same_vec(x->torque, y.torque) && x->stamp.nanos == y.stamp.nanos;
  }
  if (const auto* x = std::get_if<Path>(&a)) {
    const auto& y = std::get<Path>(b);
    if (x->waypoints.size() != y.waypoints.size()) return false;
    for (std::size_t i = 0; i < x->waypoints.size(); ++i) {
      if (!same_vec(x->waypoints[i], y.waypoints[i])) return false;
    }
    return x->cost == y.cost && x->planner_id == y.planner_id && x->iterations == y.iterations &&
           x->elapsed == y.elapsed && x->request_id == y.request_id;
  }
  if (const auto* x = std::get_if<PlanRequest>(&a)) {
    const auto& y = std::get<PlanRequest>(b);
    return same_vec(x->start, y.start) && same_vec(x->goal, y.goal) && x->robot_radius == y.robot_radius &&
           x->time_budget == y.time_budget && x->goal_tolerance == y.goal_tolerance &&
           same_vec(x->bounds.min, y.bounds.min) && same_vec(x->bounds.max, y.bounds.max) &&
           x->rng_seed == y.rng_seed && x->request_id == y.request_id;
  }
  return std::get<Status>(a).body.dump() == std::get<Status>(b).body.dump();
}

inline bool same_envelope(const Envelope& a, const Envelope& b) {
  return a.topic == b.topic && a.msg_type == b.msg_type && a.seq == b.seq && a.stamp_ns == b.stamp_ns &&
         same_payload(a.payload, b.payload);
}

}  // namespace uwtwin::oracle
