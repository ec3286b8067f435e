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
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "uwtwin/bridge/local_bus.hpp"
#include "uwtwin/bridge/topic_table.hpp"

namespace uwtwin::bridge {

enum class Transport { Tcp, WebSocket };

struct ClientOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9870;
  Transport transport = Transport::Tcp;
  std::chrono::milliseconds timeout{5000};  // connect and control round trips
};

/// Broker connection with its own io thread. Handlers run on that thread in
/// arrival order. publish() may be called from any thread; calls from
/// several threads are serialised internally.
class Client {
 public:
  /// Throws ConnectionError.
  explicit Client(ClientOptions options);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Assigns the next seq for this (connection, topic), stamps with the
  /// monotonic clock and queues the frame. Returns the seq.
  std::uint64_t publish(const std::string& topic, Payload payload);
  PublishFn publisher() {
    return [this](const std::string& topic, Payload p) { return publish(topic, std::move(p)); };
  }

  /// Returns once the broker has confirmed the subscription.
  void subscribe(const std::string& topic, Handler handler);
  void unsubscribe(const std::string& topic);

  /// Round trip through the broker. Everything published before has been
  /// routed when it returns. Rethrows the first error the broker reported
  /// since the last sync (TypeConflict, QueueOverflow, RemoteError).
  void sync();

  /// Broker round-trip time in seconds; half of it estimates one-way delay
  /// when clocks are not shared.
  double echo_rtt();

  /// Called on the io thread for every ERROR the broker sends.
  void on_error(std::function<void(const RemoteError&)> callback);

  bool connected() const;
  void close();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace uwtwin::bridge
