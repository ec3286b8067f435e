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

#include "uwtwin/bridge/broker.hpp"

#include <map>
#include <mutex>
#include <thread>

#include "link.hpp"

namespace uwtwin::bridge {

using namespace detail;

namespace {

Frame control_frame(std::string_view verb, nlohmann::json fields, std::uint64_t seq) {
  return std::make_shared<const std::string>(
      encode(make_envelope(std::string(kControlTopic), seq, monotonic_now(), control_message(verb, std::move(fields)))));
}

}  // namespace

struct Broker::Impl {
  BrokerConfig config;
  asio::io_context io;
  std::optional<tcp::acceptor> tcp_acceptor;
  std::optional<tcp::acceptor> ws_acceptor;
  std::uint16_t tcp_port = 0;
  std::uint16_t ws_port = 0;
  std::thread thread;
  bool running = false;

  TopicTable table;
  std::map<ConnId, std::shared_ptr<Link>> links;
  std::map<ConnId, std::uint64_t> control_seq;
  ConnId next_id = 1;

  mutable std::mutex stats_mu;
  BrokerStats stats;

  explicit Impl(BrokerConfig c) : config(std::move(c)) {}

  tcp::acceptor bind(std::uint16_t port) {
    beast::error_code ec;
    tcp::endpoint ep(asio::ip::make_address(config.host, ec), port);
    if (ec) throw BindError("bad host '" + config.host + "': " + ec.message());
    tcp::acceptor acc(io);
    acc.open(ep.protocol(), ec);
    if (!ec) acc.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acc.bind(ep, ec);
    if (!ec) acc.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw BindError("cannot listen on " + config.host + ":" + std::to_string(port) + ": " + ec.message());
    return acc;
  }

  void send_control(ConnId id, std::string_view verb, nlohmann::json fields) {
    auto it = links.find(id);
    if (it == links.end()) return;
    it->second->send(control_frame(verb, std::move(fields), control_seq[id]++));
  }

  void add_link(std::shared_ptr<Link> link) {
    const ConnId id = next_id++;
    links[id] = link;
    {
      std::lock_guard lk(stats_mu);
      ++stats.connections;
    }
    link->start([this, id](Frame f) { on_frame(id, std::move(f)); },
                [this, id](const std::string&) {
                  table.drop_connection(id);
                  links.erase(id);
                  control_seq.erase(id);
                });
  }

  void accept_tcp() {
    tcp_acceptor->async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;  // acceptor closed
      add_link(std::make_shared<TcpLink>(std::move(sock)));
      accept_tcp();
    });
  }

  void accept_ws() {
    ws_acceptor->async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(sock));
      ws->async_accept([this, ws](beast::error_code ec2) {
        if (ec2) return;
        add_link(std::make_shared<WsLink>(std::move(*ws)));
      });
      accept_ws();
    });
  }

  void on_frame(ConnId from, Frame frame) {
    {
      std::lock_guard lk(stats_mu);
      ++stats.frames_in;
    }
    Envelope env;
    try {
      env = decode(*frame);
    } catch (const Error& e) {
      {
        std::lock_guard lk(stats_mu);
        ++stats.decode_errors;
      }
      send_control(from, op::kError, {{"code", "DecodeError"}, {"message", e.what()}});
      return;
    }
    if (env.topic == kControlTopic) {
      on_control(from, env);
      return;
    }
    TopicTable::RouteResult routed;
    try {
      routed = table.route(from, env.topic, env.msg_type, env.seq);
    } catch (const TypeConflict& e) {
      {
        std::lock_guard lk(stats_mu);
        ++stats.type_conflicts;
      }
      const auto registered = table.type_of(env.topic);
      send_control(from, op::kError,
                   {{"code", "TypeConflict"},
                    {"message", e.what()},
                    {"topic", env.topic},
                    {"seq", env.seq},
                    {"registered", std::string(to_string(*registered))},
                    {"attempted", std::string(to_string(env.msg_type))}});
      return;
    }
    for (ConnId sub : routed.subscribers) {
      auto it = links.find(sub);
      if (it == links.end()) continue;
      auto link = it->second;
      if (link->queued() >= config.queue_limit) {
        {
          std::lock_guard lk(stats_mu);
          ++stats.overflows;
        }
        // Bypass the limit for the notice itself, then hang up.
        link->send(control_frame(op::kError,
                                 {{"code", "QueueOverflow"},
                                  {"message", "subscriber queue exceeded " + std::to_string(config.queue_limit)},
                                  {"topic", env.topic}},
                                 control_seq[sub]++));
        link->close_after_flush();
        table.drop_connection(sub);
        continue;
      }
      link->send(frame);
      std::lock_guard lk(stats_mu);
      ++stats.frames_out;
    }
  }

  void on_control(ConnId from, const Envelope& env) {
    const auto* st = std::get_if<Status>(&env.payload);
    if (!st) {
      send_control(from, op::kError, {{"code", "DecodeError"}, {"message", "@control carries STATUS only"}});
      return;
    }
    const auto& b = st->body;
    const std::string verb = b.value("op", "");
    nlohmann::json reply = {{"token", b.value("token", nlohmann::json(nullptr))}};
    if (verb == op::kSubscribe || verb == op::kUnsubscribe) {
      const std::string topic = b.value("topic", "");
      if (topic.empty() || topic == kControlTopic) {
        reply["code"] = "ParamError";
        reply["message"] = "bad topic";
        send_control(from, op::kError, reply);
        return;
      }
      reply["topic"] = topic;
      if (verb == op::kSubscribe) {
        table.subscribe(from, topic);
        send_control(from, op::kSubscribed, reply);
      } else {
        table.unsubscribe(from, topic);
        send_control(from, op::kUnsubscribed, reply);
      }
    } else if (verb == op::kPing) {
      send_control(from, op::kPong, reply);
    } else if (verb == op::kEcho) {
      if (b.contains("t0_ns")) reply["t0_ns"] = b["t0_ns"];
      send_control(from, op::kEchoReply, reply);
    } else {
      reply["code"] = "ParamError";
      reply["message"] = "unknown control verb '" + verb + "'";
      send_control(from, op::kError, reply);
    }
  }
};

Broker::Broker(BrokerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Broker::~Broker() { stop(); }

void Broker::start() {
  auto& m = *impl_;
  if (m.running) return;
  m.tcp_acceptor.emplace(m.bind(m.config.tcp_port));
  m.tcp_port = m.tcp_acceptor->local_endpoint().port();
  if (m.config.enable_ws) {
    try {
      m.ws_acceptor.emplace(m.bind(m.config.ws_port));
    } catch (...) {
      m.tcp_acceptor.reset();
      throw;
    }
    m.ws_port = m.ws_acceptor->local_endpoint().port();
  }
  m.accept_tcp();
  if (m.ws_acceptor) m.accept_ws();
  m.running = true;
  m.thread = std::thread([&m] { m.io.run(); });
}

void Broker::stop() {
  auto& m = *impl_;
  if (!m.running) return;
  asio::post(m.io, [&m] {
    beast::error_code ignored;
    if (m.tcp_acceptor) m.tcp_acceptor->close(ignored);
    if (m.ws_acceptor) m.ws_acceptor->close(ignored);
    auto links = m.links;
    for (auto& [id, link] : links) link->close_now("broker stopped");
    m.io.stop();
  });
  if (m.thread.joinable()) m.thread.join();
  m.links.clear();
  m.tcp_acceptor.reset();
  m.ws_acceptor.reset();
  m.running = false;
}

std::uint16_t Broker::tcp_port() const { return impl_->tcp_port; }
std::uint16_t Broker::ws_port() const { return impl_->ws_port; }

BrokerStats Broker::stats() const {
  std::lock_guard lk(impl_->stats_mu);
  return impl_->stats;
}

}  // namespace uwtwin::bridge
