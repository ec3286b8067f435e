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
#include <condition_variable>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "uwtwin/bridge/local_bus.hpp"

namespace uwtwin::bridge {

class MissingTrafficError : public Error {
 public:
  MissingTrafficError(std::vector<MsgType> missing);
  const std::vector<MsgType>& missing() const { return missing_; }

 private:
  std::vector<MsgType> missing_;
};

struct DelaySample {
  std::string topic;
  MsgType msg_type = MsgType::Status;
  std::uint64_t seq = 0;
  std::int64_t stamp_ns = 0;
  std::int64_t recv_ns = 0;
  std::size_t payload_bytes = 0;

  double delay_ms() const { return static_cast<double>(recv_ns - stamp_ns) * 1e-6; }
};

struct DelayStats {
  MsgType msg_type = MsgType::Status;
  std::size_t n = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double mean_bytes = 0.0;
};

struct DelayReport {
  std::vector<DelayStats> rows;

  const DelayStats* find(MsgType t) const;
  /// Columns: msg_type, n, mean_ms, median_ms, p95_ms, mean_bytes.
  std::string to_csv() const;
};

DelayStats summarize(MsgType type, std::span<const DelaySample> samples);

/// Thread-safe sink for delivery-time samples.
class DelayRecorder {
 public:
  void add(DelaySample s);
  Handler handler();

  std::size_t count(MsgType t) const;
  std::vector<DelaySample> samples() const;

  /// Blocks until every type has `window` samples or the timeout passes.
  bool wait_for(std::span<const MsgType> types, std::size_t window, std::chrono::milliseconds timeout) const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<DelaySample> samples_;
  std::map<MsgType, std::size_t> counts_;
};

/// Waits for >= window samples per type and reports per-type statistics
/// over the first `window` samples of each. Throws MissingTrafficError
/// naming every type that fell short.
DelayReport measure_delays(const DelayRecorder& recorder, std::span<const MsgType> types, std::size_t window,
                           std::chrono::milliseconds timeout);

}  // namespace uwtwin::bridge
