// Copyright 2026 The STING Authors
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

#include <netinet/in.h>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sting/channel.hpp"

namespace sting::net {

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

/// Accepts "host:port", "tcp://host:port", "udp://host:port".
HostPort parse_host_port(const std::string& text);
sockaddr_in resolve(const HostPort& hp);
std::string to_string(const sockaddr_in& addr);

/// Owning file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept;
  ~Fd();
  [[nodiscard]] int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }
  explicit operator bool() const { return fd_ >= 0; }
  void reset();
  /// Unblocks readers in other threads without releasing the descriptor.
  void shutdown();

 private:
  int fd_ = -1;
};

class TcpStream {
 public:
  static TcpStream connect(const HostPort& hp);
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  void write_all(std::span<const std::uint8_t> bytes);
  /// False on orderly EOF before any byte was read.
  bool read_exact(std::span<std::uint8_t> out);
  void shutdown() { fd_.shutdown(); }

 private:
  Fd fd_;
};

class TcpListener {
 public:
  explicit TcpListener(const HostPort& hp);
  std::optional<TcpStream> accept();
  [[nodiscard]] std::uint16_t port() const { return port_; }
  void shutdown() { fd_.shutdown(); }

 private:
  Fd fd_;
  std::uint16_t port_ = 0;
};

/// Length-prefixed frames: 4-byte big-endian length, then the payload.
void write_frame(TcpStream& stream, const std::string& payload);
std::optional<std::string> read_frame(TcpStream& stream, std::size_t max_bytes = 16u << 20);

/// UDP data-plane transport. A background thread receives datagrams and
/// posts them to the runtime with a receive timestamp taken on arrival.
class UdpTransport final : public Transport {
 public:
  UdpTransport(Runtime& runtime, const HostPort& bind);
  ~UdpTransport() override;

  void send(const std::string& dst, std::span<const std::uint8_t> bytes) override;
  void set_receive_handler(ReceiveHandler handler) override;
  [[nodiscard]] std::string local_address() const override { return local_; }

 private:
  void receive_loop();

  Runtime& runtime_;
  Fd fd_;
  std::string local_;
  std::shared_ptr<ReceiveHandler> handler_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace sting::net
