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

#include "uwtwin/latency_bench.hpp"

#include <thread>

#include "uwtwin/bridge/broker.hpp"
#include "uwtwin/campaign.hpp"
#include "uwtwin/twin.hpp"

namespace uwtwin {

BenchPayloads make_bench_payloads(bool control, std::uint64_t seed) {
  BenchPayloads p;
  const Heightmap map = generate_harbor(seed);
  VehicleState state;
  state.pose.position = Vec3(30.0, 30.0, -5.0);
  p.pose = state.pose;
  p.wrench.force = Vec3(12.5, -3.0, 0.5);
  p.wrench.torque = Vec3(0.0, 0.0, 0.8);
  if (control) {
    p.cloud.points = {Point3f{30.0F, 30.0F, -11.0F}, Point3f{30.5F, 30.0F, -11.1F}, Point3f{30.0F, 30.5F, -11.2F}};
    CameraModel cam;
    cam.image_width = 8;
    cam.image_height = 8;
    p.image = render_image(state, map, cam);
  } else {
    const auto world = build_planning_world(map);
    p.cloud = surface_to_cloud(world.surface);
    p.image = render_image(state, map, CameraModel{});
  }
  return p;
}

void run_bench_load(LoadRole role, const bridge::ClientOptions& options, const TopicRates& rates,
                    const BenchPayloads& payloads, const std::atomic<bool>& stop) {
  using Clock = std::chrono::steady_clock;
  bridge::Client client(options);
  struct Stream {
    const std::string* topic;
    double period;
    Clock::time_point next;
  };
  const auto t0 = Clock::now();
  std::vector<Stream> streams;
  if (role == LoadRole::Physical) {
    streams = {{&topics::kCloud, 1.0 / rates.cloud, t0},
               {&topics::kImage, 1.0 / rates.image, t0},
               {&topics::kPose, 1.0 / rates.pose, t0}};
  } else {
    streams = {{&topics::kWrench, 1.0 / rates.wrench, t0}};
  }
  std::uint64_t n = 0;
  while (!stop.load()) {
    auto* due = &streams.front();
    for (auto& s : streams) {
      if (s.next < due->next) due = &s;
    }
    std::this_thread::sleep_until(due->next);
    if (stop.load()) break;
    due->next += std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(due->period));
    const auto stamp = monotonic_now();
    try {
      if (due->topic == &topics::kCloud) {
        PointCloud c = payloads.cloud;
        c.stamp = stamp;
        c.seq = n++;
        client.publish(*due->topic, std::move(c));
      } else if (due->topic == &topics::kImage) {
        ImageFrame f = payloads.image;
        f.stamp = stamp;
        client.publish(*due->topic, std::move(f));
      } else if (due->topic == &topics::kPose) {
        Pose p = payloads.pose;
        p.stamp = stamp;
        client.publish(*due->topic, p);
      } else {
        Wrench w = payloads.wrench;
        w.stamp = stamp;
        client.publish(*due->topic, w);
      }
    } catch (const bridge::ConnectionError&) {
      return;
    }
  }
}

LatencyBenchResult run_latency_bench(const LatencyBenchConfig& config, LoadSpawner spawn_loads) {
  const auto t0 = std::chrono::steady_clock::now();
  bridge::BrokerConfig bc;
  bc.host = config.host;
  bc.tcp_port = config.tcp_port;
  bc.ws_port = config.ws_port;
  bc.enable_ws = config.transport == bridge::Transport::WebSocket;
  bridge::Broker broker(bc);
  broker.start();

  bridge::ClientOptions opts;
  opts.host = config.host;
  opts.transport = config.transport;
  opts.port = config.transport == bridge::Transport::Tcp ? broker.tcp_port() : broker.ws_port();

  bridge::DelayRecorder recorder;
  bridge::Client twin_side(opts);
  bridge::Client vehicle_side(opts);
  for (const auto* t : {&topics::kCloud, &topics::kImage, &topics::kPose}) twin_side.subscribe(*t, recorder.handler());
  vehicle_side.subscribe(topics::kWrench, recorder.handler());

  std::vector<std::function<void()>> stoppers;
  std::shared_ptr<const BenchPayloads> payloads;
  std::atomic<bool> stop{false};
  std::vector<std::thread> threads;
  if (!spawn_loads) {
    payloads = std::make_shared<const BenchPayloads>(make_bench_payloads(config.control, config.seed));
    for (auto role : {LoadRole::Physical, LoadRole::Digital}) {
      threads.emplace_back([&, role] { run_bench_load(role, opts, config.rates, *payloads, stop); });
    }
  } else {
    for (auto role : {LoadRole::Physical, LoadRole::Digital}) stoppers.push_back(spawn_loads(role, opts.port));
  }

  LatencyBenchResult result;
  const MsgType types[] = {MsgType::PointCloud, MsgType::Image, MsgType::Pose, MsgType::Wrench};
  auto cleanup = [&] {
    stop = true;
    for (auto& t : threads) t.join();
    threads.clear();
    for (auto& s : stoppers) s();
    stoppers.clear();
    twin_side.close();
    vehicle_side.close();
    broker.stop();
  };
  try {
    result.report = bridge::measure_delays(recorder, types, config.window, config.timeout);
  } catch (...) {
    cleanup();
    throw;
  }
  cleanup();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace uwtwin
