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

#include "uwtwin/bridge/topic_table.hpp"

namespace uwtwin::bridge {

Status control_message(std::string_view verb, nlohmann::json fields) {
  Status s{std::move(fields)};
  s.body["op"] = std::string(verb);
  return s;
}

TopicTable::RouteResult TopicTable::route(ConnId publisher, const std::string& topic, MsgType type,
                                          std::uint64_t seq) {
  Entry& e = entries_[topic];
  if (e.type && *e.type != type) throw TypeConflict(topic, *e.type, type);
  e.type = type;
  RouteResult r;
  auto it = e.last_seq.find(publisher);
  if (it == e.last_seq.end()) {
    r.gap = seq != 0;
    e.last_seq.emplace(publisher, seq);
  } else {
    r.gap = seq != it->second + 1;
    it->second = seq;
  }
  r.subscribers.assign(e.subscribers.begin(), e.subscribers.end());
  return r;
}

void TopicTable::subscribe(ConnId conn, const std::string& topic) { entries_[topic].subscribers.insert(conn); }

void TopicTable::unsubscribe(ConnId conn, const std::string& topic) {
  auto it = entries_.find(topic);
  if (it != entries_.end()) it->second.subscribers.erase(conn);
}

void TopicTable::drop_connection(ConnId conn) {
  for (auto& [_, e] : entries_) {
    e.subscribers.erase(conn);
    e.last_seq.erase(conn);
  }
}

std::optional<MsgType> TopicTable::type_of(const std::string& topic) const {
  auto it = entries_.find(topic);
  if (it == entries_.end()) return std::nullopt;
  return it->second.type;
}

std::vector<ConnId> TopicTable::subscribers(const std::string& topic) const {
  auto it = entries_.find(topic);
  if (it == entries_.end()) return {};
  return {it->second.subscribers.begin(), it->second.subscribers.end()};
}

std::vector<std::string> TopicTable::topics() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

}  // namespace uwtwin::bridge
