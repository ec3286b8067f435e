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

#include "uwtwin/bridge/local_bus.hpp"
#include "uwtwin/envsim.hpp"
#include "uwtwin/perception.hpp"

namespace uwtwin {

/// Publish rates in Hz. The wrench rate is the command rate of the
/// digital side; the sim itself only consumes wrenches.
struct TopicRates {
  double pose = 20.0;
  double wrench = 20.0;
  double image = 10.0;
  double cloud = 5.0;
  void validate() const;
};

struct SimConfig {
  VehicleParams vehicle;
  NoiseConfig noise;
  CameraModel camera;
  TopicRates rates;
  double dt = 0.01;
  double cmd_timeout = 0.5;  // s without a wrench before the command decays to zero
  Vec3 start_position{30.0, 30.0, -5.0};
  double start_yaw = 0.0;
  bool publish_images = true;
  bool publish_truth = true;
  kernels::Exec exec = kernels::Exec::Parallel;
  void validate() const;
};

/// Physical-side node: vehicle dynamics on a heightmap plus the SLAM
/// stand-in, publishing sim/cloud, sim/image, sim/pose and sim/truth.
/// Time is simulated; the caller decides whether to pace it.
class SimNode {
 public:
  SimNode(Heightmap map, SimConfig config, bridge::PublishFn publish);

  void on_wrench(const Wrench& cmd);
  /// Advances one dt and publishes whatever is due.
  void step();
  void run_for(double seconds);

  Timestamp now() const { return state_.stamp; }
  double elapsed() const { return static_cast<double>(state_.stamp.nanos) * 1e-9; }
  const VehicleState& state() const { return state_; }
  const Heightmap& map() const { return map_; }
  const SimConfig& config() const { return config_; }
  const Wrench& command() const { return cmd_; }
  std::size_t contact_events() const { return contact_events_; }
  std::size_t contact_ticks() const { return contact_ticks_; }
  std::uint64_t wrenches_received() const { return wrenches_received_; }

 private:
  Heightmap map_;
  SimConfig config_;
  bridge::PublishFn publish_;
  SlamSimulator slam_;
  VehicleState state_;
  Wrench cmd_;
  double last_cmd_at_ = -1e300;
  double next_pose_ = 0.0;
  double next_image_ = 0.0;
  double next_cloud_ = 0.0;
  bool in_contact_ = false;
  std::size_t contact_events_ = 0;
  std::size_t contact_ticks_ = 0;
  std::uint64_t wrenches_received_ = 0;
};

}  // namespace uwtwin
