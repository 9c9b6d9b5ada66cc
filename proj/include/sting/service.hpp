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
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/agent.hpp"
#include "sting/bus.hpp"
#include "sting/channel.hpp"
#include "sting/controller.hpp"
#include "sting/net.hpp"
#include "sting/run_store.hpp"
#include "sting/runtime.hpp"

namespace sting {

struct ServiceOptions {
  net::HostPort http{"127.0.0.1", 8080};
  net::HostPort bus{"127.0.0.1", 7447};
  /// Controller data endpoint for the "udp" data plane.
  net::HostPort data{"0.0.0.0", 7448};
  /// "udp" or "emulated". The emulated plane hosts one in-process agent
  /// per entry of emulated_devices, running in wall-clock time.
  std::string data_plane = "udp";
  ChannelConfig channel;
  std::vector<std::string> emulated_devices;
  std::string store_root = "sting-data";
  ControllerOptions controller;
};

/// Controller process: embedded broker, data endpoint, run store, and the
/// north-bound HTTP API.
///
///   GET  /agents                      registry
///   GET  /scenarios, /scenarios/{id}  stored scenarios
///   POST /scenarios                   store a scenario
///   GET  /runs, /runs/{id}            index, full record
///   POST /runs                        {"scenario_id"} or {"scenario"}
///   POST /runs/{id}/abort
///   POST /runs/{id}/annotate          {"execution", "completion_time_s"}
///   GET  /runs/{id}/live              text/event-stream of run events
class ControllerService {
 public:
  explicit ControllerService(ServiceOptions options);
  ~ControllerService();
  ControllerService(const ControllerService&) = delete;
  ControllerService& operator=(const ControllerService&) = delete;

  /// Binds every listener; returns once the HTTP server accepts requests.
  void start();
  /// Blocks until stop() is called from another thread or a handler.
  void wait();
  void stop();

  [[nodiscard]] std::uint16_t http_port() const { return http_port_; }
  [[nodiscard]] std::uint16_t bus_port() const;
  [[nodiscard]] std::string data_address() const;

  /// Runs fn on the controller's runtime thread and returns its result.
  template <typename F>
  auto call(F&& fn) -> decltype(fn(std::declval<Controller&>())) {
    using R = decltype(fn(std::declval<Controller&>()));
    auto task = std::make_shared<std::packaged_task<R()>>([&] { return fn(*controller_); });
    auto fut = task->get_future();
    runtime_.post([task] { (*task)(); });
    return fut.get();
  }

 private:
  class Http;

  ServiceOptions options_;
  RealtimeRuntime runtime_;
  Broker broker_;
  std::unique_ptr<BrokerServer> broker_server_;
  std::unique_ptr<EmulatedNetwork> network_;
  std::unique_ptr<Transport> data_;
  std::unique_ptr<RunStore> store_;
  std::unique_ptr<Controller> controller_;
  std::vector<std::unique_ptr<Transport>> agent_transports_;
  std::vector<std::unique_ptr<Agent>> agents_;
  std::unique_ptr<Http> http_;
  std::uint16_t http_port_ = 0;
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Minimal JSON-over-HTTP client. Throws HttpError on transport failure
/// (status 0) or any status >= 400.
Json http_json(const std::string& method, const std::string& base_url, const std::string& path,
               const std::optional<Json>& body = std::nullopt);

/// Reads a server-sent event stream, calling on_event(kind, data) until the
/// stream ends or on_event returns false.
void http_event_stream(const std::string& base_url, const std::string& path,
                       const std::function<bool(const std::string& kind, const Json& data)>& on_event);

}  // namespace sting
