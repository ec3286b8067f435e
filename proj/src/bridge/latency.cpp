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

#include "uwtwin/bridge/latency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace uwtwin::bridge {
namespace {

std::string names(const std::vector<MsgType>& types) {
  std::string out;
  for (auto t : types) {
    if (!out.empty()) out += ", ";
    out += to_string(t);
  }
  return out;
}

}  // namespace

MissingTrafficError::MissingTrafficError(std::vector<MsgType> missing)
    : Error("missing traffic for " + names(missing)), missing_(std::move(missing)) {}

const DelayStats* DelayReport::find(MsgType t) const {
  for (const auto& r : rows) {
    if (r.msg_type == t) return &r;
  }
  return nullptr;
}

std::string DelayReport::to_csv() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "msg_type,n,mean_ms,median_ms,p95_ms,mean_bytes\n";
  for (const auto& r : rows) {
    out << to_string(r.msg_type) << ',' << r.n << ',' << r.mean_ms << ',' << r.median_ms << ',' << r.p95_ms << ','
        << r.mean_bytes << '\n';
  }
  return out.str();
}

DelayStats summarize(MsgType type, std::span<const DelaySample> samples) {
  DelayStats s;
  s.msg_type = type;
  std::vector<double> d;
  double bytes = 0.0;
  for (const auto& x : samples) {
    if (x.msg_type != type) continue;
    d.push_back(x.delay_ms());
    bytes += static_cast<double>(x.payload_bytes);
  }
  s.n = d.size();
  if (d.empty()) return s;
  std::sort(d.begin(), d.end());
  s.mean_ms = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  const std::size_t n = d.size();
  s.median_ms = n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = d[std::max<std::size_t>(rank, 1) - 1];
  s.mean_bytes = bytes / n;
  return s;
}

void DelayRecorder::add(DelaySample s) {
  {
    std::lock_guard lock(mu_);
    ++counts_[s.msg_type];
    samples_.push_back(std::move(s));
  }
  cv_.notify_all();
}

Handler DelayRecorder::handler() {
  return [this](const Envelope& e, const Delivery& d) {
    add(DelaySample{e.topic, e.msg_type, e.seq, e.stamp_ns, d.recv.nanos, d.frame_bytes});
  };
}

std::size_t DelayRecorder::count(MsgType t) const {
  std::lock_guard lock(mu_);
  auto it = counts_.find(t);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<DelaySample> DelayRecorder::samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

bool DelayRecorder::wait_for(std::span<const MsgType> types, std::size_t window,
                             std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] {
    return std::all_of(types.begin(), types.end(), [&](MsgType t) {
      auto it = counts_.find(t);
      return it != counts_.end() && it->second >= window;
    });
  });
}

DelayReport measure_delays(const DelayRecorder& recorder, std::span<const MsgType> types, std::size_t window,
                           std::chrono::milliseconds timeout) {
  if (!recorder.wait_for(types, window, timeout)) {
    std::vector<MsgType> missing;
    for (auto t : types) {
      if (recorder.count(t) < window) missing.push_back(t);
    }
    throw MissingTrafficError(std::move(missing));
  }
  const auto all = recorder.samples();
  DelayReport report;
  for (auto t : types) {
    std::vector<DelaySample> first;
    for (const auto& s : all) {
      if (s.msg_type == t && first.size() < window) first.push_back(s);
    }
    report.rows.push_back(summarize(t, first));
  }
  return report;
}

}  // namespace uwtwin::bridge
