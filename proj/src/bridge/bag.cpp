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

#include "uwtwin/bridge/bag.hpp"

#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

namespace uwtwin::bridge {

double Bag::span_seconds() const {
  if (records.size() < 2) return 0.0;
  return static_cast<double>(records.back().recv_ns - records.front().recv_ns) * 1e-9;
}

std::vector<PointCloud> Bag::clouds(const std::string& topic) const {
  std::vector<PointCloud> out;
  for (const auto& r : records) {
    if (r.envelope.topic != topic) continue;
    if (const auto* c = std::get_if<PointCloud>(&r.envelope.payload)) out.push_back(*c);
  }
  return out;
}

BagRecorder::BagRecorder(std::set<std::string> topics) : filter_(std::move(topics)) {
  bag_.header.created_ns = monotonic_now().nanos;
}

void BagRecorder::record(const Envelope& envelope, Timestamp recv) {
  if (!filter_.empty() && !filter_.contains(envelope.topic)) return;
  // Delivery stamps from different connections can interleave by a few
  // nanoseconds; the bag keeps its recv_ns non-decreasing.
  std::int64_t t = recv.nanos;
  if (!bag_.records.empty()) t = std::max(t, bag_.records.back().recv_ns);
  bag_.records.push_back({t, envelope});
  if (bag_.header.counts[envelope.topic]++ == 0) bag_.header.topics.push_back(envelope.topic);
}

Bag BagRecorder::finish() { return std::move(bag_); }

void write_bag(const Bag& bag, std::ostream& out) {
  nlohmann::json header = {{"created", bag.header.created_ns},
                           {"topics", bag.header.topics},
                           {"counts", bag.header.counts}};
  out << nlohmann::json{{"header", header}}.dump() << '\n';
  for (const auto& r : bag.records) {
    out << nlohmann::json{{"recv_ns", r.recv_ns}, {"envelope", envelope_to_json(r.envelope)}}.dump() << '\n';
  }
}

void write_bag(const Bag& bag, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write bag " + path.string());
  write_bag(bag, out);
}

Bag parse_bag(std::istream& in) {
  Bag bag;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw BagFormatError(lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("header")) throw BagFormatError(lineno, "first line must be the header");
      try {
        const auto& h = j.at("header");
        bag.header.created_ns = h.at("created").get<std::int64_t>();
        bag.header.topics = h.at("topics").get<std::vector<std::string>>();
        bag.header.counts = h.at("counts").get<std::map<std::string, std::uint64_t>>();
      } catch (const nlohmann::json::exception& e) {
        throw BagFormatError(lineno, std::string("bad header: ") + e.what());
      }
      have_header = true;
      continue;
    }
    BagRecord r;
    try {
      r.recv_ns = j.at("recv_ns").get<std::int64_t>();
      r.envelope = envelope_from_json(j.at("envelope"));
    } catch (const nlohmann::json::exception& e) {
      throw BagFormatError(lineno, e.what());
    } catch (const DecodeError& e) {
      throw BagFormatError(lineno, e.what());
    }
    if (!bag.records.empty() && r.recv_ns < bag.records.back().recv_ns) {
      throw BagFormatError(lineno, "recv_ns decreases");
    }
    bag.records.push_back(std::move(r));
  }
  if (!have_header && lineno > 0) throw BagFormatError(lineno, "missing header");
  return bag;
}

Bag read_bag(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bag " + path.string());
  return parse_bag(in);
}

ReplaySummary bag_replay(const Bag& bag, const ReplayOptions& options, const PublishFn& publish) {
  if (!(options.rate > 0.0)) throw ParamError("replay rate must be > 0");
  using Clock = std::chrono::steady_clock;
  ReplaySummary summary;
  const auto start = Clock::now();
  if (bag.records.empty()) return summary;
  const std::int64_t t0 = bag.records.front().recv_ns;
  for (const auto& r : bag.records) {
    if (options.paced) {
      const auto offset = std::chrono::nanoseconds(
          static_cast<std::int64_t>(static_cast<double>(r.recv_ns - t0) / options.rate));
      std::this_thread::sleep_until(start + offset);
    }
    publish(r.envelope.topic, r.envelope.payload);
    ++summary.count;
  }
  summary.duration_s = std::chrono::duration<double>(Clock::now() - start).count();
  return summary;
}

}  // namespace uwtwin::bridge
