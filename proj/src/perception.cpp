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

#include "uwtwin/perception.hpp"

#include <cmath>
#include <numbers>

namespace uwtwin {

void NoiseConfig::validate() const {
  for (double s : {sigma_pos, sigma_ang, sigma_obs, drift_rate}) {
    if (!std::isfinite(s) || s < 0.0) throw ParamError("noise parameters must be finite and >= 0");
  }
}

void CameraModel::validate() const {
  if (!(fov_half_angle > 0.0 && fov_half_angle < std::numbers::pi / 2)) {
    throw ParamError("fov_half_angle must lie in (0, pi/2)");
  }
  if (!(max_range > 0.0)) throw ParamError("max_range must be > 0");
  if (features_per_frame < 0) throw ParamError("features_per_frame must be >= 0");
  if (image_width <= 0 || image_height <= 0) throw ParamError("image size must be positive");
}

SlamSimulator::SlamSimulator(NoiseConfig noise, CameraModel camera, kernels::Exec exec)
    : noise_(noise), camera_(camera), exec_(exec), rng_(noise.rng_seed) {
  noise_.validate();
  camera_.validate();
}

Vec3 SlamSimulator::gaussian3(double sigma) {
  const double a = normal_(rng_);
  const double b = normal_(rng_);
  const double c = normal_(rng_);
  return sigma * Vec3(a, b, c);
}

Pose SlamSimulator::estimate_pose(const VehicleState& true_state, double elapsed) {
  if (elapsed < 0.0) throw ParamError("elapsed must be >= 0");
  const double dt = std::max(0.0, elapsed - last_elapsed_);
  last_elapsed_ = std::max(last_elapsed_, elapsed);
  bias_ += gaussian3(noise_.drift_rate * std::sqrt(dt));

  Pose est = true_state.pose;
  est.position = true_state.pose.position + bias_ + gaussian3(noise_.sigma_pos);
  const Vec3 rot = gaussian3(noise_.sigma_ang);
  const double angle = rot.norm();
  if (angle > 0.0) {
    est.orientation = (true_state.pose.orientation * Quat(Eigen::AngleAxisd(angle, rot / angle))).normalized();
  }
  est.stamp = true_state.stamp;
  est.frame = "world";
  return est;
}

SlamEstimate SlamSimulator::observe_features(const VehicleState& true_state, const Heightmap& map,
                                             const Pose& est_pose) {
  const Quat& q_true = true_state.pose.orientation;
  const Vec3& origin = true_state.pose.position;
  const double cos_min = std::cos(camera_.fov_half_angle);

  // Directions are drawn serially so the stream is independent of threading.
  std::vector<Vec3> dirs(static_cast<std::size_t>(camera_.features_per_frame));
  for (auto& d : dirs) {
    const double cos_t = 1.0 - uniform_(rng_) * (1.0 - cos_min);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * std::numbers::pi * uniform_(rng_);
    d = q_true * Vec3(sin_t * std::cos(phi), sin_t * std::sin(phi), -cos_t);
  }
  const auto ranges = kernels::raycast_batch(map, origin, dirs, camera_.max_range, exec_);

  SlamEstimate out;
  out.est_pose = est_pose;
  out.stamp = true_state.stamp;
  out.features.stamp = true_state.stamp;
  out.features.seq = frame_seq_++;
  out.features.points.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (std::isnan(ranges[i])) continue;
    const Vec3 hit = origin + ranges[i] * dirs[i] + gaussian3(noise_.sigma_obs);
    const Vec3 in_camera = q_true.conjugate() * (hit - origin);
    if (in_camera.norm() > camera_.max_range) continue;
    out.features.points.push_back(Point3f::from_vec(est_pose.orientation * in_camera + est_pose.position));
  }
  return out;
}

ImageFrame SlamSimulator::render_image(const VehicleState& true_state, const Heightmap& map) const {
  return uwtwin::render_image(true_state, map, camera_, exec_);
}

ImageFrame render_image(const VehicleState& true_state, const Heightmap& map, const CameraModel& cam,
                        kernels::Exec exec) {
  ImageFrame img;
  img.width = static_cast<std::uint32_t>(cam.image_width);
  img.height = static_cast<std::uint32_t>(cam.image_height);
  img.encoding = ImageEncoding::Gray8;
  img.data = kernels::depth_render(map, true_state.pose.position, true_state.pose.orientation, cam.pinhole(), exec);
  img.stamp = true_state.stamp;
  return img;
}

}  // namespace uwtwin
