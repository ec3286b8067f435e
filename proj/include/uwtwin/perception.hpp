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

#include <cstdint>
#include <random>

#include "uwtwin/envsim.hpp"
#include "uwtwin/kernels.hpp"
#include "uwtwin/messages.hpp"

namespace uwtwin {

struct NoiseConfig {
  double sigma_pos = 0.05;    // m, isotropic, per estimate
  double sigma_ang = 0.005;   // rad, axis-angle
  double sigma_obs = 0.05;    // m, per feature
  double drift_rate = 0.005;  // m/√s random-walk bias
  std::uint64_t rng_seed = 0;

  void validate() const;
  static NoiseConfig noiseless(std::uint64_t seed = 0) { return {0.0, 0.0, 0.0, 0.0, seed}; }
};

/// Downward-looking camera rigidly mounted at the vehicle origin.
struct CameraModel {
  double fov_half_angle = 0.6;
  double max_range = 12.0;
  int features_per_frame = 200;
  int image_width = 320;
  int image_height = 240;

  void validate() const;
  kernels::PinholeSpec pinhole() const {
    return {image_width, image_height, fov_half_angle, max_range};
  }
};

struct SlamEstimate {
  Pose est_pose;
  PointCloud features;  // world frame, registered with est_pose
  Timestamp stamp;
};

/// Stand-in for a visual SLAM front end: truth plus white noise and a
/// random-walk drift for the pose, and raycast seafloor features whose
/// world coordinates inherit the pose error.
class SlamSimulator {
 public:
  SlamSimulator(NoiseConfig noise, CameraModel camera,
                kernels::Exec exec = kernels::Exec::Parallel);

  /// `elapsed` is seconds since the start of the run; the drift advances by
  /// the time since the previous call.
  Pose estimate_pose(const VehicleState& true_state, double elapsed);

  SlamEstimate observe_features(const VehicleState& true_state, const Heightmap& map, const Pose& est_pose);

  ImageFrame render_image(const VehicleState& true_state, const Heightmap& map) const;

  const Vec3& drift_bias() const { return bias_; }
  const NoiseConfig& noise() const { return noise_; }
  const CameraModel& camera() const { return camera_; }

 private:
  Vec3 gaussian3(double sigma);

  NoiseConfig noise_;
  CameraModel camera_;
  kernels::Exec exec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  Vec3 bias_ = Vec3::Zero();
  double last_elapsed_ = 0.0;
  std::uint64_t frame_seq_ = 0;
};

ImageFrame render_image(const VehicleState& true_state, const Heightmap& map, const CameraModel& cam,
                        kernels::Exec exec = kernels::Exec::Parallel);

}  // namespace uwtwin
