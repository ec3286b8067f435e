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
#include <cstdint>
#include <memory>
#include <string>

#include "uwtwin/bridge/topic_table.hpp"

namespace uwtwin::bridge {

struct BrokerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t tcp_port = 9870;  // 0 picks a free port
  std::uint16_t ws_port = 9871;
  bool enable_ws = true;
  std::size_t queue_limit = 1024;  // outbound frames per subscriber
};

struct BrokerStats {
  std::uint64_t connections = 0;  // accepted so far
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t type_conflicts = 0;
  std::uint64_t decode_errors = 0;
  std::uint64_t overflows = 0;
};

/// Star-topology pub/sub broker over TCP and WebSocket. Inbound frames of
/// each connection are routed in arrival order on a single io thread, so
/// per-publisher per-topic order holds for every subscriber. A subscriber
/// whose outbound queue reaches queue_limit gets an ERROR {QueueOverflow}
/// and is disconnected.
class Broker {
 public:
  explicit Broker(BrokerConfig config = {});
  ~Broker();
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  /// Binds both listeners and starts the io thread. Throws BindError.
  void start();
  void stop();

  std::uint16_t tcp_port() const;
  std::uint16_t ws_port() const;
  BrokerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace uwtwin::bridge
