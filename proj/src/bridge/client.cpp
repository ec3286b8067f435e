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

#include "uwtwin/bridge/client.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "link.hpp"

namespace uwtwin::bridge {

using namespace detail;

struct Client::Impl : std::enable_shared_from_this<Client::Impl> {
  ClientOptions options;
  asio::io_context io;
  std::optional<asio::executor_work_guard<asio::io_context::executor_type>> work;
  std::shared_ptr<Link> link;
  std::thread thread;

  std::mutex mu;
  std::condition_variable cv;
  bool open = false;
  std::string close_reason;
  std::map<std::string, Handler> handlers;
  std::map<std::string, std::uint64_t> next_seq;
  std::map<std::uint64_t, nlohmann::json> replies;
  std::deque<nlohmann::json> errors;
  std::function<void(const RemoteError&)> error_cb;
  std::uint64_t next_token = 1;

  std::mutex publish_mu;

  explicit Impl(ClientOptions o) : options(std::move(o)) {}

  void connect() {
    beast::error_code ec;
    tcp::resolver resolver(io);
    const auto results = resolver.resolve(options.host, std::to_string(options.port), ec);
    if (ec) throw ConnectionError("resolve " + options.host + ": " + ec.message());
    tcp::socket sock(io);
    asio::connect(sock, results, ec);
    if (ec) {
      throw ConnectionError("connect " + options.host + ":" + std::to_string(options.port) + ": " + ec.message());
    }
    if (options.transport == Transport::Tcp) {
      link = std::make_shared<TcpLink>(std::move(sock));
    } else {
      websocket::stream<tcp::socket> ws(std::move(sock));
      ws.handshake(options.host + ":" + std::to_string(options.port), "/", ec);
      if (ec) throw ConnectionError("websocket handshake: " + ec.message());
      link = std::make_shared<WsLink>(std::move(ws));
    }
    open = true;
    auto self = shared_from_this();
    link->start([self](Frame f) { self->on_frame(std::move(f)); },
                [self](const std::string& reason) {
                  std::lock_guard lk(self->mu);
                  self->open = false;
                  self->close_reason = reason;
                  self->cv.notify_all();
                });
    work.emplace(asio::make_work_guard(io));
    thread = std::thread([this] { io.run(); });
  }

  void on_frame(Frame frame) {
    Envelope env;
    try {
      env = decode(*frame);
    } catch (const Error&) {
      return;
    }
    const Timestamp recv = monotonic_now();
    if (env.topic == kControlTopic) {
      const auto* st = std::get_if<Status>(&env.payload);
      if (!st) return;
      const auto& b = st->body;
      const std::string verb = b.value("op", "");
      if (verb == op::kError) {
        std::function<void(const RemoteError&)> cb;
        {
          std::lock_guard lk(mu);
          cb = error_cb;
          if (b.contains("token") && b["token"].is_number_unsigned()) {
            replies[b["token"].get<std::uint64_t>()] = b;
          } else {
            errors.push_back(b);
          }
          cv.notify_all();
        }
        if (cb) cb(RemoteError(b.value("code", "Error"), b.value("message", "")));
        return;
      }
      if (b.contains("token") && b["token"].is_number_unsigned()) {
        std::lock_guard lk(mu);
        replies[b["token"].get<std::uint64_t>()] = b;
        cv.notify_all();
      }
      return;
    }
    Handler h;
    {
      std::lock_guard lk(mu);
      auto it = handlers.find(env.topic);
      if (it == handlers.end()) return;
      h = it->second;
    }
    h(env, Delivery{recv, frame->size()});
  }

  void send(std::string bytes) {
    auto frame = std::make_shared<const std::string>(std::move(bytes));
    auto l = link;
    asio::post(io, [l, frame] { l->send(frame); });
  }

  std::uint64_t publish(const std::string& topic, Payload payload) {
    std::lock_guard plk(publish_mu);
    std::uint64_t seq;
    {
      std::lock_guard lk(mu);
      if (!open) throw ConnectionError("connection closed: " + close_reason);
      seq = next_seq[topic]++;
    }
    send(encode(make_envelope(topic, seq, monotonic_now(), std::move(payload))));
    return seq;
  }

  nlohmann::json round_trip(std::string_view verb, nlohmann::json fields) {
    std::uint64_t token;
    {
      std::lock_guard lk(mu);
      if (!open) throw ConnectionError("connection closed: " + close_reason);
      token = next_token++;
    }
    fields["token"] = token;
    publish(std::string(kControlTopic), control_message(verb, std::move(fields)));
    std::unique_lock lk(mu);
    const bool got = cv.wait_for(lk, options.timeout, [&] { return replies.count(token) || !open; });
    if (!replies.count(token)) {
      if (!open) throw ConnectionError("connection closed: " + close_reason);
      if (!got) throw ConnectionError("broker did not answer " + std::string(verb));
    }
    auto reply = std::move(replies[token]);
    replies.erase(token);
    if (reply.value("op", "") == op::kError) {
      throw RemoteError(reply.value("code", "Error"), reply.value("message", ""));
    }
    return reply;
  }

  void shutdown() {
    if (thread.joinable()) {
      auto l = link;
      asio::post(io, [l] { l->close_now("client closed"); });
      work.reset();
      thread.join();
    }
  }
};

Client::Client(ClientOptions options) : impl_(std::make_shared<Impl>(std::move(options))) { impl_->connect(); }

Client::~Client() {
  try {
    close();
  } catch (...) {
  }
}

std::uint64_t Client::publish(const std::string& topic, Payload payload) {
  return impl_->publish(topic, std::move(payload));
}

void Client::subscribe(const std::string& topic, Handler handler) {
  {
    std::lock_guard lk(impl_->mu);
    impl_->handlers[topic] = std::move(handler);
  }
  impl_->round_trip(op::kSubscribe, {{"topic", topic}});
}

void Client::unsubscribe(const std::string& topic) {
  impl_->round_trip(op::kUnsubscribe, {{"topic", topic}});
  std::lock_guard lk(impl_->mu);
  impl_->handlers.erase(topic);
}

void Client::sync() {
  impl_->round_trip(op::kPing, nlohmann::json::object());
  nlohmann::json err;
  {
    std::lock_guard lk(impl_->mu);
    if (impl_->errors.empty()) return;
    err = std::move(impl_->errors.front());
    impl_->errors.clear();
  }
  const std::string code = err.value("code", "Error");
  if (code == "TypeConflict") {
    const auto reg = msg_type_from_string(err.value("registered", ""));
    const auto att = msg_type_from_string(err.value("attempted", ""));
    if (reg && att) throw TypeConflict(err.value("topic", ""), *reg, *att);
  }
  if (code == "QueueOverflow") throw QueueOverflow(err.value("message", ""));
  throw RemoteError(code, err.value("message", ""));
}

double Client::echo_rtt() {
  const auto t0 = monotonic_now();
  impl_->round_trip(op::kEcho, {{"t0_ns", t0.nanos}});
  return static_cast<double>(monotonic_now().nanos - t0.nanos) * 1e-9;
}

void Client::on_error(std::function<void(const RemoteError&)> callback) {
  std::lock_guard lk(impl_->mu);
  impl_->error_cb = std::move(callback);
}

bool Client::connected() const {
  std::lock_guard lk(impl_->mu);
  return impl_->open;
}

void Client::close() { impl_->shutdown(); }

}  // namespace uwtwin::bridge
