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

// Framed async transports shared by the broker and the client. All members
// are used from the owning io_context thread only.

#include <array>
#include <cstdint>
#include <cstring>
#include <deque>
#include <functional>
#include <memory>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace uwtwin::bridge::detail {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

using Frame = std::shared_ptr<const std::string>;

inline constexpr std::uint32_t kMaxFrameBytes = 256U << 20;

class Link : public std::enable_shared_from_this<Link> {
 public:
  using OnFrame = std::function<void(Frame)>;
  using OnClose = std::function<void(const std::string& reason)>;

  virtual ~Link() = default;

  void start(OnFrame on_frame, OnClose on_close) {
    on_frame_ = std::move(on_frame);
    on_close_ = std::move(on_close);
    read_next();
  }

  void send(Frame frame) {
    if (closed_ || closing_) return;
    queue_.push_back(std::move(frame));
    if (!writing_) write_next();
  }

  /// Flushes what is queued, then closes.
  void close_after_flush() {
    if (closed_) return;
    closing_ = true;
    if (!writing_) shutdown("closed");
  }

  void close_now(const std::string& reason) { shutdown(reason); }

  std::size_t queued() const { return queue_.size(); }
  bool closed() const { return closed_; }

 protected:
  virtual void read_next() = 0;
  virtual void async_write_frame(const std::string& frame, std::function<void(beast::error_code)> done) = 0;
  virtual void close_transport() = 0;

  void deliver(Frame f) {
    if (on_frame_ && !closed_) on_frame_(std::move(f));
  }

  void shutdown(const std::string& reason) {
    if (closed_) return;
    closed_ = true;
    queue_.clear();
    close_transport();
    if (on_close_) {
      auto cb = std::move(on_close_);
      cb(reason);
    }
    on_frame_ = nullptr;
  }

 private:
  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (closing_) shutdown("closed");
      return;
    }
    writing_ = true;
    auto self = shared_from_this();
    async_write_frame(*queue_.front(), [this, self](beast::error_code ec) {
      if (closed_) return;
      if (ec) {
        shutdown(ec.message());
        return;
      }
      queue_.pop_front();
      write_next();
    });
  }

  OnFrame on_frame_;
  OnClose on_close_;
  std::deque<Frame> queue_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

class TcpLink : public Link {
 public:
  explicit TcpLink(tcp::socket socket) : socket_(std::move(socket)) {
    beast::error_code ignored;
    socket_.set_option(tcp::no_delay(true), ignored);
  }

 protected:
  void read_next() override {
    auto self = shared_from_this();
    asio::async_read(socket_, asio::buffer(header_), [this, self](beast::error_code ec, std::size_t) {
      if (ec) {
        shutdown(ec == asio::error::eof ? "peer closed" : ec.message());
        return;
      }
      const std::uint32_t len = static_cast<std::uint32_t>(header_[0]) | static_cast<std::uint32_t>(header_[1]) << 8 |
                                static_cast<std::uint32_t>(header_[2]) << 16 |
                                static_cast<std::uint32_t>(header_[3]) << 24;
      if (len > kMaxFrameBytes) {
        shutdown("frame too large");
        return;
      }
      body_ = std::make_shared<std::string>(4 + static_cast<std::size_t>(len), '\0');
      std::memcpy(body_->data(), header_.data(), 4);
      asio::async_read(socket_, asio::buffer(body_->data() + 4, len), [this, self](beast::error_code ec2, std::size_t) {
        if (ec2) {
          shutdown(ec2.message());
          return;
        }
        deliver(std::move(body_));
        if (!closed()) read_next();
      });
    });
  }

  void async_write_frame(const std::string& frame, std::function<void(beast::error_code)> done) override {
    asio::async_write(socket_, asio::buffer(frame),
                      [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
  }

  void close_transport() override {
    beast::error_code ignored;
    socket_.shutdown(tcp::socket::shutdown_both, ignored);
    socket_.close(ignored);
  }

 private:
  tcp::socket socket_;
  std::array<std::uint8_t, 4> header_{};
  std::shared_ptr<std::string> body_;
};

/// One complete wire frame, length prefix included, per binary message.
class WsLink : public Link {
 public:
  explicit WsLink(websocket::stream<tcp::socket> ws) : ws_(std::move(ws)) {
    ws_.binary(true);
    ws_.read_message_max(kMaxFrameBytes);
  }

 protected:
  void read_next() override {
    auto self = shared_from_this();
    ws_.async_read(buffer_, [this, self](beast::error_code ec, std::size_t) {
      if (ec) {
        shutdown(ec == websocket::error::closed ? "peer closed" : ec.message());
        return;
      }
      auto frame = std::make_shared<std::string>(beast::buffers_to_string(buffer_.data()));
      buffer_.consume(buffer_.size());
      deliver(std::move(frame));
      if (!closed()) read_next();
    });
  }

  void async_write_frame(const std::string& frame, std::function<void(beast::error_code)> done) override {
    ws_.async_write(asio::buffer(frame), [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
  }

  void close_transport() override {
    beast::error_code ignored;
    auto& sock = beast::get_lowest_layer(ws_);
    sock.shutdown(tcp::socket::shutdown_both, ignored);
    sock.close(ignored);
  }

 private:
  websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
};

}  // namespace uwtwin::bridge::detail
