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

#include "uwtwin/bridge/local_bus.hpp"

namespace uwtwin::bridge {

ConnId LocalBus::connect(std::string name) {
  const ConnId id = next_id_++;
  names_[id] = std::move(name);
  return id;
}

void LocalBus::subscribe(ConnId conn, const std::string& topic, Handler handler) {
  handlers_[{conn, topic}] = std::move(handler);
  table_.subscribe(conn, topic);
}

void LocalBus::unsubscribe(ConnId conn, const std::string& topic) {
  table_.unsubscribe(conn, topic);
  handlers_.erase({conn, topic});
}

std::uint64_t LocalBus::publish(ConnId conn, const std::string& topic, Payload payload) {
  auto& next = next_seq_[{conn, topic}];
  const Envelope env = make_envelope(topic, next, clock_(), std::move(payload));
  auto routed = table_.route(conn, topic, env.msg_type, env.seq);
  const std::uint64_t seq = next++;
  auto frame = std::make_shared<const std::string>(encode(env));
  for (ConnId sub : routed.subscribers) queue_.push_back({sub, topic, frame});
  drain();
  return seq;
}

void LocalBus::drain() {
  if (draining_) return;
  draining_ = true;
  struct Reset {
    bool& flag;
    ~Reset() { flag = false; }
  } reset{draining_};
  while (!queue_.empty()) {
    Pending p = std::move(queue_.front());
    queue_.pop_front();
    auto it = handlers_.find({p.to, p.topic});
    if (it == handlers_.end()) continue;
    const Envelope env = decode(*p.frame);
    ++delivered_;
    // Copy: the handler may unsubscribe itself.
    Handler h = it->second;
    h(env, Delivery{clock_(), p.frame->size()});
  }
}

}  // namespace uwtwin::bridge
