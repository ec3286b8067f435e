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

#include <deque>
#include <functional>
#include <map>
#include <string>

#include "uwtwin/bridge/topic_table.hpp"

namespace uwtwin::bridge {

struct Delivery {
  Timestamp recv;
  std::size_t frame_bytes = 0;
};

using Handler = std::function<void(const Envelope&, const Delivery&)>;

/// Assigns the per-topic seq and publish stamp, returns the seq.
using PublishFn = std::function<std::uint64_t(const std::string& topic, Payload payload)>;

using Clock = std::function<Timestamp()>;

/// Synchronous in-process broker. Frames go through encode/decode exactly
/// as on the network; delivery happens on the publishing thread in FIFO
/// order, with publishes made from inside handlers queued behind the
/// current fan-out. Not thread-safe.
class LocalBus {
 public:
  explicit LocalBus(Clock clock = monotonic_now) : clock_(std::move(clock)) {}

  ConnId connect(std::string name);
  void subscribe(ConnId conn, const std::string& topic, Handler handler);
  void unsubscribe(ConnId conn, const std::string& topic);

  /// Throws TypeConflict on a topic type mismatch.
  std::uint64_t publish(ConnId conn, const std::string& topic, Payload payload);

  PublishFn publisher(ConnId conn) {
    return [this, conn](const std::string& topic, Payload p) { return publish(conn, topic, std::move(p)); };
  }

  const TopicTable& table() const { return table_; }
  std::uint64_t delivered() const { return delivered_; }

 private:
  struct Pending {
    ConnId to;
    std::string topic;
    std::shared_ptr<const std::string> frame;
  };

  void drain();

  Clock clock_;
  TopicTable table_;
  ConnId next_id_ = 1;
  std::map<ConnId, std::string> names_;
  std::map<std::pair<ConnId, std::string>, Handler> handlers_;
  std::map<std::pair<ConnId, std::string>, std::uint64_t> next_seq_;
  std::deque<Pending> queue_;
  bool draining_ = false;
  std::uint64_t delivered_ = 0;
};

}  // namespace uwtwin::bridge
