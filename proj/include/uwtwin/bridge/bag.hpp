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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "uwtwin/bridge/local_bus.hpp"

namespace uwtwin::bridge {

class BagFormatError : public Error {
 public:
  BagFormatError(std::size_t line, const std::string& what)
      : Error("bag line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct BagRecord {
  std::int64_t recv_ns = 0;
  Envelope envelope;
};

struct BagHeader {
  std::int64_t created_ns = 0;
  std::vector<std::string> topics;
  std::map<std::string, std::uint64_t> counts;
};

/// JSON-lines log: a header line, then one {recv_ns, envelope} per line.
struct Bag {
  BagHeader header;
  std::vector<BagRecord> records;

  double span_seconds() const;
  std::vector<PointCloud> clouds(const std::string& topic) const;
};

/// Collects delivered envelopes; an empty topic filter records everything.
class BagRecorder {
 public:
  explicit BagRecorder(std::set<std::string> topics = {});

  void record(const Envelope& envelope, Timestamp recv);
  Handler handler() {
    return [this](const Envelope& e, const Delivery& d) { record(e, d.recv); };
  }
  const Bag& bag() const { return bag_; }
  Bag finish();

 private:
  std::set<std::string> filter_;
  Bag bag_;
};

void write_bag(const Bag& bag, std::ostream& out);
void write_bag(const Bag& bag, const std::filesystem::path& path);
Bag parse_bag(std::istream& in);
Bag read_bag(const std::filesystem::path& path);

struct ReplaySummary {
  std::size_t count = 0;
  double duration_s = 0.0;  // wall time spent replaying
};

struct ReplayOptions {
  double rate = 1.0;  // > 0; gaps are scaled by 1 / rate
  bool paced = true;  // false republishes back-to-back (in-process tests)
};

/// Republishes every record through `publish` (which assigns fresh seq and
/// stamps) with the original payloads.
ReplaySummary bag_replay(const Bag& bag, const ReplayOptions& options, const PublishFn& publish);

}  // namespace uwtwin::bridge
