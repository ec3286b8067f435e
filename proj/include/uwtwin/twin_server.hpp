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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "uwtwin/bridge/broker.hpp"
#include "uwtwin/bridge/client.hpp"
#include "uwtwin/bridge/latency.hpp"
#include "uwtwin/sim_node.hpp"
#include "uwtwin/twin.hpp"

namespace uwtwin {

struct TwinServerConfig {
  bridge::BrokerConfig broker;
  bool run_broker = true;  // false: connect to an existing broker at broker.tcp_port
  TwinConfig twin;
  PlannerParams planner;
  PlannerId variant = PlannerId::RrtStar;
  bool run_planner = true;
  double control_rate = 20.0;   // Hz, follower ticks
  double publish_rate = 50.0;   // Hz, checks for a changed version to publish a delta
  double full_snapshot_period = 2.0;  // s between full snapshots for late joiners
  double metrics_period = 1.0;  // s
  std::uint16_t http_port = 9872;  // 0 picks a free port
  bool enable_http = true;
  std::optional<std::filesystem::path> static_dir;
  Mode initial_mode = Mode::Teleop;
};

/// Broker + twin + planner worker + UI gateway. The twin is the single
/// writer; every access goes through one mutex in arrival order.
class TwinServer {
 public:
  explicit TwinServer(TwinServerConfig config);
  ~TwinServer();
  TwinServer(const TwinServer&) = delete;
  TwinServer& operator=(const TwinServer&) = delete;

  /// Throws BindError if a port is taken.
  void start();
  void stop();

  std::uint16_t tcp_port() const;
  std::uint16_t ws_port() const;
  std::uint16_t http_port() const;

  /// Runs f(twin) under the state lock.
  template <typename F>
  auto with_twin(F&& f) {
    std::lock_guard lk(mu_);
    return f(*twin_);
  }

  nlohmann::json snapshot(std::optional<std::uint64_t> cursor);
  SessionMetrics metrics();
  const bridge::DelayRecorder& delays() const { return delays_; }

 private:
  void loop();
  void planner_worker();

  TwinServerConfig config_;
  std::unique_ptr<bridge::Broker> broker_;
  std::unique_ptr<bridge::Client> client_;
  std::unique_ptr<bridge::Client> planner_client_;
  std::unique_ptr<Twin> twin_;
  std::mutex mu_;
  bridge::DelayRecorder delays_;

  struct Http;
  std::unique_ptr<Http> http_;

  std::mutex plan_mu_;
  std::condition_variable plan_cv_;
  std::deque<PlanRequest> plan_queue_;
  std::atomic<bool> plan_cancel_{false};

  std::atomic<bool> running_{false};
  std::thread loop_thread_;
  std::thread planner_thread_;
};

/// Runs a SimNode against a broker in wall-clock time: wrenches arrive on
/// the client's io thread and are applied at the next step.
class RealtimeSim {
 public:
  RealtimeSim(Heightmap map, SimConfig config, bridge::ClientOptions options);

  /// Steps until `seconds` of sim time have passed or *stop becomes true.
  void run(double seconds, const std::atomic<bool>* stop = nullptr);

  const SimNode& node() const { return *node_; }
  bridge::Client& client() { return *client_; }

 private:
  std::unique_ptr<bridge::Client> client_;
  std::unique_ptr<SimNode> node_;
  std::mutex cmd_mu_;
  std::optional<Wrench> pending_;
};

}  // namespace uwtwin
