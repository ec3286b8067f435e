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

#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace uwtwin {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Nanoseconds on the process-wide monotonic clock. All components on one
/// host share this epoch, so differences across processes are meaningful.
struct Timestamp {
  std::int64_t nanos = 0;

  static Timestamp from_seconds(double s) {
    return Timestamp{static_cast<std::int64_t>(s * 1e9)};
  }
  double seconds() const { return static_cast<double>(nanos) * 1e-9; }

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline Timestamp monotonic_now() {
  const auto t = std::chrono::steady_clock::now().time_since_epoch();
  return Timestamp{std::chrono::duration_cast<std::chrono::nanoseconds>(t).count()};
}

/// Axis-aligned box, half-open on the max side for containment tests.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() < max.array()).all();
  }
  bool contains_closed(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 extent() const { return max - min; }
  Aabb padded(double m) const { return {min.array() - m, max.array() + m}; }

  friend bool operator==(const Aabb& a, const Aabb& b) {
    return a.min == b.min && a.max == b.max;
  }
};

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure the library reports derives from Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

class NeedMoreData : public Error {
 public:
  explicit NeedMoreData(std::size_t have, std::size_t need)
      : Error("need more data: have " + std::to_string(have) + " bytes, need " +
              std::to_string(need)),
        have_(have),
        need_(need) {}
  std::size_t have() const { return have_; }
  std::size_t need() const { return need_; }

 private:
  std::size_t have_;
  std::size_t need_;
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace uwtwin
