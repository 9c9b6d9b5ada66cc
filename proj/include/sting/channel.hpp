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

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/runtime.hpp"

namespace sting {

struct Datagram {
  std::string src;
  std::vector<std::uint8_t> bytes;
  std::int64_t rx_ns = 0;
};

class TransportFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Datagram transport. Packets arrive whole or not at all. Received
/// datagrams are handed to the receive handler on the owning runtime.
class Transport {
 public:
  using ReceiveHandler = std::function<void(Datagram&&)>;

  virtual ~Transport() = default;
  virtual void send(const std::string& dst, std::span<const std::uint8_t> bytes) = 0;
  virtual void set_receive_handler(ReceiveHandler handler) = 0;
  [[nodiscard]] virtual std::string local_address() const = 0;
};

struct ChannelConfig {
  double capacity_bps = 100e6;
  std::int64_t propagation_ns = 0;
  std::uint64_t buffer_bytes = 625'000;
};

class UnknownEndpoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransmitResult {
  bool accepted = false;
  std::int64_t delivery_ns = 0;
};

struct Delivery {
  std::string src;
  std::string dst;
  std::vector<std::uint8_t> bytes;
  std::int64_t delivery_ns = 0;
};

/// Shared-capacity medium: one FIFO server with a tail-drop byte buffer,
/// shared by every attached endpoint in both directions.
///
/// A packet accepted at `now` completes service at
/// max(now, previous completion) + bits / capacity and is delivered
/// propagation_ns later. Occupancy counts every packet not yet through
/// service, including the one being served.
class EmulatedChannel {
 public:
  explicit EmulatedChannel(ChannelConfig config);

  void attach(const std::string& endpoint);
  void detach(const std::string& endpoint);
  [[nodiscard]] bool attached(const std::string& endpoint) const;

  /// `now_ns` must not go backwards between calls.
  TransmitResult transmit(const std::string& src, const std::string& dst, std::vector<std::uint8_t> bytes,
                          std::int64_t now_ns);
  /// Pops every packet delivered at or before until_ns, in delivery order.
  std::vector<Delivery> advance(std::int64_t until_ns);

  [[nodiscard]] std::uint64_t queue_bytes(std::int64_t now_ns);
  [[nodiscard]] std::optional<std::int64_t> next_delivery_ns() const;
  [[nodiscard]] const ChannelConfig& config() const { return config_; }

  [[nodiscard]] std::uint64_t dropped_packets() const { return dropped_packets_; }
  [[nodiscard]] std::uint64_t accepted_packets() const { return accepted_packets_; }
  [[nodiscard]] std::uint64_t max_queue_bytes() const { return max_queue_bytes_; }

 private:
  struct InService {
    double completion_ns;
    std::uint64_t bytes;
  };
  void drain_service(std::int64_t now_ns);

  ChannelConfig config_;
  std::map<std::string, bool> endpoints_;
  double last_completion_ns_ = 0.0;
  std::deque<InService> in_service_;
  std::uint64_t queued_bytes_ = 0;
  std::deque<Delivery> in_flight_;
  std::uint64_t dropped_packets_ = 0;
  std::uint64_t accepted_packets_ = 0;
  std::uint64_t max_queue_bytes_ = 0;
};

struct TraceEvent {
  std::int64_t time_ns = 0;
  std::string src;
  std::string dst;
  std::size_t bytes = 0;
  bool accepted = false;
};

/// Binds an EmulatedChannel to a runtime and hands out per-endpoint
/// transports. Delivery events are scheduled on the runtime.
class EmulatedNetwork {
 public:
  EmulatedNetwork(Runtime& runtime, ChannelConfig config);
  ~EmulatedNetwork();

  /// The returned transport must not outlive the network.
  std::unique_ptr<Transport> endpoint(const std::string& name);

  /// Drops everything to and from `name` while set.
  void set_partitioned(const std::string& name, bool partitioned);
  void set_trace(std::function<void(const TraceEvent&)> trace) { trace_ = std::move(trace); }

  [[nodiscard]] EmulatedChannel& channel() { return channel_; }
  [[nodiscard]] Runtime& runtime() { return runtime_; }

 private:
  class Endpoint;
  friend class Endpoint;

  void send(const std::string& src, const std::string& dst, std::span<const std::uint8_t> bytes);
  void deliver();

  Runtime& runtime_;
  EmulatedChannel channel_;
  std::map<std::string, Transport::ReceiveHandler> handlers_;
  std::map<std::string, bool> partitioned_;
  std::function<void(const TraceEvent&)> trace_;
};

}  // namespace sting
