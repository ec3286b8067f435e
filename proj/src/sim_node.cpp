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

#include "uwtwin/sim_node.hpp"

#include <cmath>

#include "uwtwin/twin.hpp"

namespace uwtwin {

void TopicRates::validate() const {
  for (double r : {pose, wrench, image, cloud}) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ParamError("topic rates must be positive");
  }
}

void SimConfig::validate() const {
  vehicle.validate();
  noise.validate();
  camera.validate();
  rates.validate();
  if (!(dt > 0.0 && dt <= 0.05)) throw ParamError("sim dt must lie in (0, 0.05]");
  if (!(cmd_timeout > 0.0)) throw ParamError("cmd_timeout must be positive");
  if (!start_position.allFinite()) throw ParamError("start position must be finite");
}

SimNode::SimNode(Heightmap map, SimConfig config, bridge::PublishFn publish)
    : map_(std::move(map)),
      config_(std::move(config)),
      publish_(std::move(publish)),
      slam_(config_.noise, config_.camera, config_.exec) {
  map_.validate();
  config_.validate();
  state_.pose.position = config_.start_position;
  state_.pose.orientation = Quat(Eigen::AngleAxisd(config_.start_yaw, Vec3::UnitZ()));
  state_.pose.stamp = state_.stamp;
}

void SimNode::on_wrench(const Wrench& cmd) {
  cmd_ = cmd.clamped(WrenchLimits{});
  last_cmd_at_ = elapsed();
  ++wrenches_received_;
}

void SimNode::step() {
  const Wrench applied = (elapsed() - last_cmd_at_ > config_.cmd_timeout) ? Wrench{} : cmd_;
  state_ = step_dynamics(state_, applied, config_.vehicle, config_.dt);
  const bool contact = resolve_ground_contact(state_, map_, config_.vehicle);
  if (contact) {
    ++contact_ticks_;
    if (!in_contact_) ++contact_events_;
  }
  in_contact_ = contact;
  state_.pose.stamp = state_.stamp;

  const double t = elapsed();
  constexpr double eps = 1e-9;
  const bool cloud_due = t + eps >= next_cloud_;
  const bool pose_due = t + eps >= next_pose_;
  const bool image_due = config_.publish_images && t + eps >= next_image_;
  if (!cloud_due && !pose_due && !image_due) return;

  Pose est;
  if (cloud_due || pose_due) {
    est = slam_.estimate_pose(state_, t);
    est.stamp = state_.stamp;
  }
  if (cloud_due) {
    next_cloud_ += 1.0 / config_.rates.cloud;
    publish_(topics::kCloud, slam_.observe_features(state_, map_, est).features);
  }
  if (image_due) {
    next_image_ += 1.0 / config_.rates.image;
    publish_(topics::kImage, slam_.render_image(state_, map_));
  }
  if (pose_due) {
    next_pose_ += 1.0 / config_.rates.pose;
    publish_(topics::kPose, est);
    if (config_.publish_truth) publish_(topics::kTruth, state_.pose);
  }
}

void SimNode::run_for(double seconds) {
  const double until = elapsed() + seconds;
  while (elapsed() + 1e-12 < until) step();
}

}  // namespace uwtwin
