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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uwtwin/messages.hpp"

namespace uwtwin::bridge {

using ConnId = std::uint64_t;

/// Reserved topic carrying SUBSCRIBE / UNSUBSCRIBE / PING / ECHO verbs and
/// the broker's replies, all as STATUS envelopes.
inline constexpr std::string_view kControlTopic = "@control";

namespace op {
inline constexpr std::string_view kSubscribe = "SUBSCRIBE";
inline constexpr std::string_view kUnsubscribe = "UNSUBSCRIBE";
inline constexpr std::string_view kSubscribed = "SUBSCRIBED";
inline constexpr std::string_view kUnsubscribed = "UNSUBSCRIBED";
inline constexpr std::string_view kPing = "PING";
inline constexpr std::string_view kPong = "PONG";
inline constexpr std::string_view kEcho = "ECHO";
inline constexpr std::string_view kEchoReply = "ECHO_REPLY";
inline constexpr std::string_view kError = "ERROR";
}  // namespace op

class TypeConflict : public Error {
 public:
  TypeConflict(const std::string& topic, MsgType registered, MsgType attempted)
      : Error("topic '" + topic + "' carries " + std::string(to_string(registered)) + ", not " +
              std::string(to_string(attempted))),
        topic_(topic) {}
  const std::string& topic() const { return topic_; }

 private:
  std::string topic_;
};

class ConnectionError : public Error {
 public:
  using Error::Error;
};

class QueueOverflow : public Error {
 public:
  using Error::Error;
};

class BindError : public Error {
 public:
  using Error::Error;
};

/// Error reported by the broker to a client, keyed by the exception name.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message) : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

Status control_message(std::string_view verb, nlohmann::json fields = nlohmann::json::object());

/// Topic registry: one message type per topic (fixed by the first publish),
/// subscriber sets, and the last seq seen per publisher.
class TopicTable {
 public:
  struct RouteResult {
    std::vector<ConnId> subscribers;
    bool gap = false;  // seq did not follow the previous one from this publisher
  };

  /// Throws TypeConflict if the topic is registered with another type.
  RouteResult route(ConnId publisher, const std::string& topic, MsgType type, std::uint64_t seq);

  void subscribe(ConnId conn, const std::string& topic);
  void unsubscribe(ConnId conn, const std::string& topic);
  void drop_connection(ConnId conn);

  std::optional<MsgType> type_of(const std::string& topic) const;
  std::vector<ConnId> subscribers(const std::string& topic) const;
  std::vector<std::string> topics() const;

 private:
  struct Entry {
    std::optional<MsgType> type;
    std::set<ConnId> subscribers;
    std::map<ConnId, std::uint64_t> last_seq;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace uwtwin::bridge
