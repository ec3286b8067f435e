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

#include "uwtwin/twin_server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <httplib.h>

namespace uwtwin {

using nlohmann::json;
using namespace std::chrono_literals;

struct TwinServer::Http {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

TwinServer::TwinServer(TwinServerConfig config) : config_(std::move(config)) {}

TwinServer::~TwinServer() { stop(); }

void TwinServer::start() {
  if (running_) return;
  if (config_.run_broker) {
    broker_ = std::make_unique<bridge::Broker>(config_.broker);
    broker_->start();
  }
  const std::uint16_t port = broker_ ? broker_->tcp_port() : config_.broker.tcp_port;

  if (config_.enable_http) {
    http_ = std::make_unique<Http>();
    auto& srv = http_->server;
    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    auto json_reply = [](httplib::Response& res, const json& j) { res.set_content(j.dump(), "application/json"); };
    srv.Get("/api/snapshot", [this, json_reply](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::uint64_t> cursor;
      if (req.has_param("cursor")) cursor = std::stoull(req.get_param_value("cursor"));
      json_reply(res, snapshot(cursor));
    });
    srv.Get("/api/surface", [this, json_reply](const httplib::Request&, httplib::Response& res) {
      json_reply(res, with_twin([](Twin& t) { return t.surface_body(); }));
    });
    srv.Get("/api/octree", [this, json_reply](const httplib::Request&, httplib::Response& res) {
      json_reply(res, with_twin([](Twin& t) { return t.octree_body(); }));
    });
    srv.Get("/api/metrics", [this, json_reply](const httplib::Request&, httplib::Response& res) {
      json_reply(res, metrics().to_json());
    });
    if (config_.static_dir && std::filesystem::is_directory(*config_.static_dir)) {
      srv.set_mount_point("/", config_.static_dir->string());
    }
    if (config_.http_port == 0) {
      http_->port = srv.bind_to_any_port(config_.broker.host);
    } else if (srv.bind_to_port(config_.broker.host, config_.http_port)) {
      http_->port = config_.http_port;
    } else {
      http_->port = -1;
    }
    if (http_->port <= 0) {
      if (broker_) broker_->stop();
      throw bridge::BindError("cannot listen on " + config_.broker.host + ":" + std::to_string(config_.http_port));
    }
    http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
  }

  bridge::ClientOptions opts;
  opts.host = config_.broker.host;
  opts.port = port;
  client_ = std::make_unique<bridge::Client>(opts);
  twin_ = std::make_unique<Twin>(config_.twin, client_->publisher());
  if (config_.initial_mode != Mode::Idle) twin_->set_mode(config_.initial_mode, monotonic_now());

  auto ingest = [this](const Envelope& env, const bridge::Delivery& d) {
    if (env.msg_type != MsgType::Status) {
      delays_.add({env.topic, env.msg_type, env.seq, env.stamp_ns, d.recv.nanos, d.frame_bytes});
    }
    std::lock_guard lk(mu_);
    twin_->ingest(env, d);
  };
  for (const auto* t : {&topics::kPose, &topics::kTruth, &topics::kCloud, &topics::kImage, &topics::kPlanPath,
                        &topics::kPlanStatus, &topics::kUiAxes, &topics::kUiPlanRequest, &topics::kUiMode}) {
    client_->subscribe(*t, ingest);
  }

  running_ = true;
  if (config_.run_planner) {
    planner_client_ = std::make_unique<bridge::Client>(opts);
    planner_client_->subscribe(topics::kPlanRequest, [this](const Envelope& env, const bridge::Delivery&) {
      if (const auto* r = std::get_if<PlanRequest>(&env.payload)) {
        std::lock_guard lk(plan_mu_);
        plan_queue_.push_back(*r);
        plan_cv_.notify_one();
      }
    });
    planner_thread_ = std::thread([this] { planner_worker(); });
  }
  loop_thread_ = std::thread([this] { loop(); });
}

void TwinServer::stop() {
  if (running_.exchange(false)) {
    plan_cancel_ = true;
    plan_cv_.notify_all();
    if (loop_thread_.joinable()) loop_thread_.join();
    if (planner_thread_.joinable()) planner_thread_.join();
  }
  if (planner_client_) planner_client_->close();
  if (client_) client_->close();
  if (http_) {
    http_->server.stop();
    if (http_->thread.joinable()) http_->thread.join();
    http_.reset();
  }
  if (broker_) broker_->stop();
}

std::uint16_t TwinServer::tcp_port() const { return broker_ ? broker_->tcp_port() : config_.broker.tcp_port; }
std::uint16_t TwinServer::ws_port() const { return broker_ ? broker_->ws_port() : config_.broker.ws_port; }
std::uint16_t TwinServer::http_port() const { return http_ ? static_cast<std::uint16_t>(http_->port) : 0; }

json TwinServer::snapshot(std::optional<std::uint64_t> cursor) {
  std::lock_guard lk(mu_);
  return twin_->snapshot(cursor, monotonic_now());
}

SessionMetrics TwinServer::metrics() {
  std::lock_guard lk(mu_);
  return twin_->metrics();
}

void TwinServer::loop() {
  using Clock = std::chrono::steady_clock;
  const auto tick = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / config_.publish_rate));
  const auto control = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / config_.control_rate));
  const auto full = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.full_snapshot_period));
  const auto metrics_every = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.metrics_period));

  auto next = Clock::now();
  auto next_control = next;
  auto next_full = next;
  auto next_metrics = next + metrics_every;
  std::optional<std::uint64_t> published;

  static const std::vector<MsgType> kDelayTypes{MsgType::PointCloud, MsgType::Image, MsgType::Pose, MsgType::Wrench};

  while (running_) {
    const auto now = Clock::now();
    try {
      std::lock_guard lk(mu_);
      const Timestamp stamp = monotonic_now();
      if (now >= next_control) {
        next_control += control;
        twin_->control_tick(stamp);
      }
      std::optional<json> snap;
      if (now >= next_full) {
        next_full += full;
        snap = twin_->snapshot(std::nullopt, stamp);
      } else if (!published || *published != twin_->version()) {
        snap = twin_->snapshot(published, stamp);
      }
      if (snap) {
        published = twin_->version();
        client_->publish(topics::kSnapshot, Status{std::move(*snap)});
      }
      if (now >= next_metrics) {
        next_metrics += metrics_every;
        json report = json::array();
        for (auto t : kDelayTypes) {
          if (delays_.count(t) == 0) continue;
          std::vector<bridge::DelaySample> mine;
          for (auto& s : delays_.samples()) {
            if (s.msg_type == t) mine.push_back(s);
          }
          const auto st = bridge::summarize(t, mine);
          report.push_back({{"msg_type", to_string(t)},
                            {"n", st.n},
                            {"mean_ms", st.mean_ms},
                            {"median_ms", st.median_ms},
                            {"p95_ms", st.p95_ms},
                            {"mean_bytes", st.mean_bytes}});
        }
        twin_->metrics().delay_report = report;
        client_->publish(topics::kMetrics, Status{twin_->metrics().to_json()});
      }
    } catch (const bridge::ConnectionError&) {
      break;
    }
    next += tick;
    std::this_thread::sleep_until(next);
  }
}

void TwinServer::planner_worker() {
  PlannerService service(config_.planner, [this] {
    std::lock_guard lk(mu_);
    return twin_->octree();
  }, config_.variant);
  while (true) {
    PlanRequest req;
    {
      std::unique_lock lk(plan_mu_);
      plan_cv_.wait(lk, [&] { return !plan_queue_.empty() || !running_; });
      if (!running_) return;
      req = plan_queue_.front();
      plan_queue_.pop_front();
    }
    Payload result = service.handle(req, &plan_cancel_);
    try {
      const bool ok = std::holds_alternative<Path>(result);
      planner_client_->publish(ok ? topics::kPlanPath : topics::kPlanStatus, std::move(result));
    } catch (const bridge::ConnectionError&) {
      return;
    }
  }
}

RealtimeSim::RealtimeSim(Heightmap map, SimConfig config, bridge::ClientOptions options)
    : client_(std::make_unique<bridge::Client>(options)) {
  node_ = std::make_unique<SimNode>(std::move(map), std::move(config), client_->publisher());
  client_->subscribe(topics::kWrench, [this](const Envelope& env, const bridge::Delivery&) {
    if (const auto* w = std::get_if<Wrench>(&env.payload)) {
      std::lock_guard lk(cmd_mu_);
      pending_ = *w;
    }
  });
}

void RealtimeSim::run(double seconds, const std::atomic<bool>* stop) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const double start = node_->elapsed();
  while (node_->elapsed() - start < seconds) {
    if (stop && stop->load()) break;
    {
      std::lock_guard lk(cmd_mu_);
      if (pending_) {
        node_->on_wrench(*pending_);
        pending_.reset();
      }
    }
    node_->step();
    std::this_thread::sleep_until(
        t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(node_->elapsed() - start)));
  }
}

}  // namespace uwtwin
