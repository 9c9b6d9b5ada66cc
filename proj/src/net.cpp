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

#include "sting/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace sting::net {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw TransportFailure(what + ": " + std::strerror(errno));
}

std::mutex handler_mu;

}  // namespace

HostPort parse_host_port(const std::string& text) {
  std::string s = text;
  if (auto pos = s.find("://"); pos != std::string::npos) s = s.substr(pos + 3);
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected host:port, got '" + text + "'");
  HostPort hp;
  hp.host = s.substr(0, colon);
  if (hp.host.empty()) hp.host = "0.0.0.0";
  const auto port = std::stoul(s.substr(colon + 1));
  if (port > 0xFFFF) throw std::invalid_argument("port out of range in '" + text + "'");
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

sockaddr_in resolve(const HostPort& hp) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(hp.port);
  if (inet_pton(AF_INET, hp.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (getaddrinfo(hp.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
    throw TransportFailure("cannot resolve " + hp.host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

std::string to_string(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
  return std::string(buf) + ":" + std::to_string(ntohs(addr.sin_port));
}

Fd& Fd::operator=(Fd&& o) noexcept {
  if (this != &o) {
    reset();
    fd_ = o.release();
  }
  return *this;
}

Fd::~Fd() { reset(); }

void Fd::reset() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Fd::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpStream TcpStream::connect(const HostPort& hp) {
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (!fd) fail("socket");
  const auto addr = resolve(hp);
  if (::connect(fd.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
    fail("connect " + hp.host + ":" + std::to_string(hp.port));
  return TcpStream(std::move(fd));
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = ::send(fd_.get(), bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    off += static_cast<std::size_t>(n);
  }
}

bool TcpStream::read_exact(std::span<std::uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    const auto n = ::recv(fd_.get(), out.data() + off, out.size() - off, 0);
    if (n == 0) {
      if (off == 0) return false;
      throw TransportFailure("connection closed mid-frame");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("recv");
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

TcpListener::TcpListener(const HostPort& hp) : fd_(::socket(AF_INET, SOCK_STREAM, 0)) {
  if (!fd_) fail("socket");
  int one = 1;
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto addr = resolve(hp);
  if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) fail("bind");
  if (::listen(fd_.get(), 64) != 0) fail("listen");
  socklen_t len = sizeof addr;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

std::optional<TcpStream> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_.get(), nullptr, nullptr);
    if (fd >= 0) return TcpStream(Fd(fd));
    if (errno == EINTR) continue;
    return std::nullopt;
  }
}

void write_frame(TcpStream& stream, const std::string& payload) {
  std::vector<std::uint8_t> buf(4 + payload.size());
  const auto n = static_cast<std::uint32_t>(payload.size());
  buf[0] = static_cast<std::uint8_t>(n >> 24);
  buf[1] = static_cast<std::uint8_t>(n >> 16);
  buf[2] = static_cast<std::uint8_t>(n >> 8);
  buf[3] = static_cast<std::uint8_t>(n);
  std::memcpy(buf.data() + 4, payload.data(), payload.size());
  stream.write_all(buf);
}

std::optional<std::string> read_frame(TcpStream& stream, std::size_t max_bytes) {
  std::uint8_t len[4];
  if (!stream.read_exact(len)) return std::nullopt;
  const std::uint32_t n = (std::uint32_t{len[0]} << 24) | (std::uint32_t{len[1]} << 16) |
                          (std::uint32_t{len[2]} << 8) | std::uint32_t{len[3]};
  if (n > max_bytes) throw TransportFailure("frame too large");
  std::string payload(n, '\0');
  if (n && !stream.read_exact({reinterpret_cast<std::uint8_t*>(payload.data()), n}))
    throw TransportFailure("connection closed mid-frame");
  return payload;
}

UdpTransport::UdpTransport(Runtime& runtime, const HostPort& bind)
    : runtime_(runtime), fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
  if (!fd_) fail("socket");
  auto addr = resolve(bind);
  if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) fail("bind udp");
  socklen_t len = sizeof addr;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  local_ = to_string(addr);
  int buf = 8 << 20;
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  thread_ = std::thread([this] { receive_loop(); });
}

UdpTransport::~UdpTransport() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

void UdpTransport::send(const std::string& dst, std::span<const std::uint8_t> bytes) {
  const auto addr = resolve(parse_host_port(dst));
  const auto n = ::sendto(fd_.get(), bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr),
                          sizeof addr);
  // ENOBUFS/EAGAIN mean the local queue overflowed; that is loss, not failure.
  if (n < 0 && errno != ENOBUFS && errno != EAGAIN && errno != ECONNREFUSED) fail("sendto " + dst);
}

void UdpTransport::set_receive_handler(ReceiveHandler handler) {
  std::lock_guard lock(handler_mu);
  handler_ = std::make_shared<ReceiveHandler>(std::move(handler));
}

void UdpTransport::receive_loop() {
  std::vector<std::uint8_t> buf(65536);
  while (!stopping_) {
    pollfd p{fd_.get(), POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    sockaddr_in from{};
    socklen_t len = sizeof from;
    const auto n = ::recvfrom(fd_.get(), buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
    if (n < 0) continue;
    const auto rx_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
    std::shared_ptr<ReceiveHandler> handler;
    {
      std::lock_guard lock(handler_mu);
      handler = handler_;
    }
    if (!handler || !*handler) continue;
    Datagram d{to_string(from), std::vector<std::uint8_t>(buf.begin(), buf.begin() + n), rx_ns};
    runtime_.post([handler, d = std::move(d)]() mutable { (*handler)(std::move(d)); });
  }
}

}  // namespace sting::net
