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

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "sting/net.hpp"
#include "sting/runtime.hpp"

namespace sting {

using Json = nlohmann::json;
using SubscriptionId = std::uint64_t;

/// MQTT-style filter match: '+' matches one level, a trailing '#' matches
/// the remaining levels (including none).
bool topic_matches(const std::string& filter, const std::string& topic);

/// Publish/subscribe control plane. Handlers run on the runtime of the bus
/// that owns the subscription, never inside publish().
class MessageBus {
 public:
  using Handler = std::function<void(const std::string& topic, const Json& payload)>;

  virtual ~MessageBus() = default;
  virtual void publish(const std::string& topic, const Json& payload) = 0;
  virtual SubscriptionId subscribe(const std::string& filter, Handler handler) = 0;
  virtual void unsubscribe(SubscriptionId id) = 0;
};

/// In-process topic router. Also the core of the embedded broker: remote
/// connections attach to it as ordinary subscribers.
class Broker final : public MessageBus {
 public:
  explicit Broker(Runtime& runtime) : runtime_(runtime) {}

  void publish(const std::string& topic, const Json& payload) override;
  SubscriptionId subscribe(const std::string& filter, Handler handler) override;
  void unsubscribe(SubscriptionId id) override;

  /// Subscription whose handler is called synchronously on the publishing
  /// thread; used by the network server to forward frames.
  SubscriptionId subscribe_direct(const std::string& filter, Handler handler);

  /// Messages on topics matching any blocked filter are silently dropped.
  void block(const std::string& filter);
  void unblock(const std::string& filter);

  [[nodiscard]] std::uint64_t published() const { return published_; }

 private:
  struct Sub {
    std::string filter;
    std::shared_ptr<Handler> handler;
    bool direct = false;
  };

  Runtime& runtime_;
  mutable std::mutex mu_;
  std::map<SubscriptionId, Sub> subs_;
  std::vector<std::string> blocked_;
  SubscriptionId next_id_ = 1;
  std::atomic<std::uint64_t> published_{0};
};

/// Exposes a Broker over TCP with length-prefixed JSON frames:
///   client -> server  {"op":"sub","filter":F} | {"op":"pub","topic":T,"payload":P}
///   server -> client  {"op":"msg","filter":F,"topic":T,"payload":P}
class BrokerServer {
 public:
  BrokerServer(Broker& broker, const net::HostPort& listen);
  ~BrokerServer();
  BrokerServer(const BrokerServer&) = delete;
  BrokerServer& operator=(const BrokerServer&) = delete;

  [[nodiscard]] std::uint16_t port() const { return listener_.port(); }
  void stop();

 private:
  struct Connection;
  void accept_loop();
  void serve(std::shared_ptr<Connection> conn);

  Broker& broker_;
  net::TcpListener listener_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<std::shared_ptr<Connection>> connections_;
  std::vector<std::thread> threads_;
  std::thread acceptor_;
};

/// Client side of BrokerServer.
class RemoteBus final : public MessageBus {
 public:
  RemoteBus(Runtime& runtime, const net::HostPort& server);
  ~RemoteBus() override;

  void publish(const std::string& topic, const Json& payload) override;
  SubscriptionId subscribe(const std::string& filter, Handler handler) override;
  void unsubscribe(SubscriptionId id) override;

  [[nodiscard]] bool connected() const { return connected_; }

 private:
  void read_loop();
  void send(const Json& frame);

  Runtime& runtime_;
  net::TcpStream stream_;
  std::mutex write_mu_;
  std::mutex mu_;
  std::map<SubscriptionId, std::pair<std::string, std::shared_ptr<Handler>>> subs_;
  SubscriptionId next_id_ = 1;
  std::atomic<bool> connected_{true};
  std::thread reader_;
};

}  // namespace sting
