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

#include <gtest/gtest.h>

#include <chrono>
#include <condition_variable>
#include <future>
#include <mutex>
#include <random>
#include <thread>

#include "generators.hpp"
#include "oracles.hpp"
#include "uwtwin/bridge/broker.hpp"
#include "uwtwin/bridge/client.hpp"
#include "uwtwin/twin_server.hpp"

namespace uwtwin::bridge {
namespace {

using namespace std::chrono_literals;

class Collector {
 public:
  Handler handler() {
    return [this](const Envelope& e, const Delivery& d) {
      std::lock_guard lk(mu_);
      got_.push_back(e);
      recv_.push_back(d.recv);
      cv_.notify_all();
    };
  }
  bool wait_for(std::size_t n, std::chrono::milliseconds timeout = 10s) {
    std::unique_lock lk(mu_);
    return cv_.wait_for(lk, timeout, [&] { return got_.size() >= n; });
  }
  std::vector<Envelope> got() {
    std::lock_guard lk(mu_);
    return got_;
  }
  std::size_t size() {
    std::lock_guard lk(mu_);
    return got_.size();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<Envelope> got_;
  std::vector<Timestamp> recv_;
};

BrokerConfig ephemeral() {
  BrokerConfig c;
  c.tcp_port = 0;
  c.ws_port = 0;
  return c;
}

ClientOptions tcp(const Broker& b) {
  ClientOptions o;
  o.port = b.tcp_port();
  return o;
}

ClientOptions ws(const Broker& b) {
  ClientOptions o;
  o.port = b.ws_port();
  o.transport = Transport::WebSocket;
  return o;
}

Wrench wrench(double fx) {
  Wrench w;
  w.force = Vec3(fx, 0, 0);
  return w;
}

class NetTest : public ::testing::Test {
 protected:
  void SetUp() override { broker_.start(); }
  void TearDown() override { broker_.stop(); }
  Broker broker_{ephemeral()};
};

void expect_in_order(const std::vector<Envelope>& got, std::size_t n) {
  ASSERT_EQ(got.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    ASSERT_EQ(got[i].seq, i);
    ASSERT_EQ(std::get<Wrench>(got[i].payload).force.x(), static_cast<double>(i));
  }
}

TEST_F(NetTest, ThousandWrenchesArriveInOrderOverTcp) {
  Client sub(tcp(broker_));
  Client pub(tcp(broker_));
  Collector c;
  sub.subscribe("cmd/wrench", c.handler());
  for (int i = 0; i < 1000; ++i) pub.publish("cmd/wrench", wrench(i));
  pub.sync();
  ASSERT_TRUE(c.wait_for(1000));
  expect_in_order(c.got(), 1000);
}

TEST_F(NetTest, ThousandWrenchesArriveInOrderOverWebSocket) {
  Client sub(ws(broker_));
  Client pub(ws(broker_));
  Collector c;
  sub.subscribe("cmd/wrench", c.handler());
  for (int i = 0; i < 1000; ++i) pub.publish("cmd/wrench", wrench(i));
  pub.sync();
  ASSERT_TRUE(c.wait_for(1000));
  expect_in_order(c.got(), 1000);
}

TEST_F(NetTest, MixedTransportsInteroperate) {
  Client sub(ws(broker_));
  Client pub(tcp(broker_));
  Collector c;
  sub.subscribe("sim/pose", c.handler());
  std::mt19937_64 rng(2);
  std::vector<Payload> sent;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(testgen::random_payload(rng, MsgType::Pose));
    pub.publish("sim/pose", sent.back());
  }
  ASSERT_TRUE(c.wait_for(50));
  const auto got = c.got();
  for (int i = 0; i < 50; ++i) EXPECT_EQ(got[i].payload, sent[i]);
}

TEST_F(NetTest, SubscribeSemantics) {
  Client pub(tcp(broker_));
  Client early(tcp(broker_));
  Collector a;
  early.subscribe("t", a.handler());
  for (int i = 0; i < 5; ++i) pub.publish("t", wrench(i));
  pub.sync();
  ASSERT_TRUE(a.wait_for(5));

  Client late(tcp(broker_));
  Collector b;
  late.subscribe("t", b.handler());
  late.sync();
  pub.sync();
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(b.size(), 0U);
  EXPECT_EQ(a.size(), 5U);
}

TEST_F(NetTest, TwoSubscribersSeeIdenticalStreams) {
  Client pub(tcp(broker_));
  Client s1(tcp(broker_));
  Client s2(ws(broker_));
  Collector a, b;
  s1.subscribe("sim/cloud", a.handler());
  s2.subscribe("sim/cloud", b.handler());
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) pub.publish("sim/cloud", testgen::random_payload(rng, MsgType::PointCloud));
  ASSERT_TRUE(a.wait_for(300));
  ASSERT_TRUE(b.wait_for(300));
  EXPECT_EQ(a.got(), b.got());
}

TEST_F(NetTest, UnsubscribeStopsDelivery) {
  Client pub(tcp(broker_));
  Client sub(tcp(broker_));
  Collector a;
  sub.subscribe("t", a.handler());
  pub.publish("t", wrench(0));
  ASSERT_TRUE(a.wait_for(1));
  sub.unsubscribe("t");
  for (int i = 0; i < 5; ++i) pub.publish("t", wrench(i));
  pub.sync();
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(a.size(), 1U);
}

TEST_F(NetTest, TypeConflictIsReported) {
  Client pub(tcp(broker_));
  pub.publish("cmd/wrench", wrench(1));
  pub.sync();
  pub.publish("cmd/wrench", Pose{});
  EXPECT_THROW(pub.sync(), TypeConflict);
  EXPECT_NO_THROW(pub.sync());
  EXPECT_GE(broker_.stats().type_conflicts, 1U);
}

TEST_F(NetTest, PublishWithoutSubscribersIsAcked) {
  Client pub(tcp(broker_));
  EXPECT_EQ(pub.publish("nobody/listens", wrench(1)), 0U);
  EXPECT_EQ(pub.publish("nobody/listens", wrench(2)), 1U);
  EXPECT_NO_THROW(pub.sync());
}

TEST_F(NetTest, EchoRoundTrip) {
  Client c(ws(broker_));
  const double rtt = c.echo_rtt();
  EXPECT_GT(rtt, 0.0);
  EXPECT_LT(rtt, 1.0);
}

TEST_F(NetTest, SlowSubscriberOverflowsInsteadOfDropping) {
  broker_.stop();
  BrokerConfig cfg = ephemeral();
  cfg.queue_limit = 8;
  Broker small(cfg);
  small.start();
  Client pub(tcp(small));
  Client sub(tcp(small));
  std::promise<void> release;
  auto released = release.get_future().share();
  std::atomic<int> seen{0};
  std::promise<std::string> error;
  std::once_flag once;
  sub.on_error([&](const RemoteError& e) { std::call_once(once, [&] { error.set_value(e.code()); }); });
  sub.subscribe("sim/cloud", [&](const Envelope&, const Delivery&) {
    ++seen;
    released.wait();
  });
  PointCloud big;
  big.points.assign(40000, Point3f{1, 2, 3});
  for (int i = 0; i < 300 && small.stats().overflows == 0; ++i) {
    pub.publish("sim/cloud", big);
    if (i % 10 == 9) pub.sync();
  }
  pub.sync();
  EXPECT_GE(small.stats().overflows, 1U);
  release.set_value();
  auto f = error.get_future();
  ASSERT_EQ(f.wait_for(10s), std::future_status::ready);
  EXPECT_EQ(f.get(), "QueueOverflow");
  for (int i = 0; i < 100 && sub.connected(); ++i) std::this_thread::sleep_for(20ms);
  EXPECT_FALSE(sub.connected());
  small.stop();
}

TEST(Net, BusyPortGivesBindError) {
  Broker first(ephemeral());
  first.start();
  BrokerConfig taken = ephemeral();
  taken.tcp_port = first.tcp_port();
  Broker second(taken);
  EXPECT_THROW(second.start(), BindError);
  first.stop();
}

TEST(Net, ConnectingToNothingFails) {
  Broker b(ephemeral());
  b.start();
  const auto port = b.tcp_port();
  b.stop();
  ClientOptions o;
  o.port = port;
  EXPECT_THROW(Client c(o), ConnectionError);
}

TEST(Net, ClosedClientRefusesToPublish) {
  Broker b(ephemeral());
  b.start();
  Client c(tcp(b));
  c.close();
  EXPECT_THROW(c.publish("t", wrench(0)), ConnectionError);
  b.stop();
}

TwinServerConfig server_config() {
  TwinServerConfig cfg;
  cfg.broker = ephemeral();
  cfg.enable_http = false;
  return cfg;
}

TEST(TwinServerNet, TeleopRelayReachesTheVehicle) {
  TwinServer server(server_config());
  server.start();
  ClientOptions o;
  o.port = server.ws_port();
  o.transport = Transport::WebSocket;
  Client ui(o);
  o.port = server.tcp_port();
  o.transport = Transport::Tcp;
  Client vehicle(o);
  Collector got;
  vehicle.subscribe(topics::kWrench, got.handler());
  for (int i = 0; i < 1000; ++i) {
    ui.publish(topics::kUiAxes, Status{{{"axes", {1, 0, 0, 0, 0, 0}}}});
  }
  ui.sync();
  ASSERT_TRUE(got.wait_for(1000, 20s));
  for (const auto& e : got.got()) ASSERT_EQ(std::get<Wrench>(e.payload).force.x(), 20.0);
  const auto m = server.metrics();
  EXPECT_EQ(m.teleop_commands, 1000U);
  EXPECT_EQ(m.teleop_acked, 1000U);
  EXPECT_EQ(m.idle_commands, 0U);
  server.stop();
}

TEST(TwinServerNet, PoseStalenessStaysBounded) {
  TwinServer server(server_config());
  server.start();

  SimConfig sim;
  sim.publish_images = false;
  sim.noise.rng_seed = 1;
  ClientOptions o;
  o.port = server.tcp_port();
  RealtimeSim rt(generate_harbor(7), sim, o);
  std::atomic<bool> stop{false};
  std::thread sim_thread([&] { rt.run(1e9, &stop); });

  o.port = server.ws_port();
  o.transport = Transport::WebSocket;
  Client ui(o);
  std::mutex mu;
  std::optional<std::pair<double, std::int64_t>> latest;  // staleness at publish, publish stamp
  ui.subscribe(topics::kSnapshot, [&](const Envelope& e, const Delivery&) {
    const auto& b = std::get<Status>(e.payload).body;
    if (!b.at("staleness_s").is_number()) return;
    std::lock_guard lk(mu);
    latest = {b.at("staleness_s").get<double>(), e.stamp_ns};
  });

  std::this_thread::sleep_for(1s);  // reach steady state
  std::vector<double> samples;
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> jitter(3, 11);
  const auto until = std::chrono::steady_clock::now() + 5s;
  while (std::chrono::steady_clock::now() < until) {
    std::this_thread::sleep_for(std::chrono::milliseconds(jitter(rng)));
    std::lock_guard lk(mu);
    if (!latest) continue;
    samples.push_back(latest->first + static_cast<double>(monotonic_now().nanos - latest->second) * 1e-9);
  }
  stop = true;
  sim_thread.join();
  server.stop();

  ASSERT_GT(samples.size(), 200U);
  std::sort(samples.begin(), samples.end());
  const double p95 = samples[static_cast<std::size_t>(std::ceil(0.95 * samples.size())) - 1];
  RecordProperty("staleness_p95_ms", std::to_string(p95 * 1e3));
  EXPECT_LE(p95, 0.150);
}

}  // namespace
}  // namespace uwtwin::bridge
