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
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/agent.hpp"
#include "sting/bus.hpp"
#include "sting/control.hpp"
#include "sting/endpoint.hpp"
#include "sting/run_store.hpp"
#include "sting/scenario.hpp"

namespace sting {

struct ControllerOptions {
  std::int64_t heartbeat_interval_ns = 1'000'000'000;
  int missed_heartbeats = 3;
  std::int64_t ack_timeout_ns = 5'000'000'000;
  std::int64_t collect_timeout_ns = 5'000'000'000;
  /// Gap between the last ack and the common start time of a step.
  std::int64_t arm_lead_ns = 0;
  /// Live window events during a step; 0 disables.
  std::int64_t live_interval_ns = 1'000'000'000;
};

struct AgentEntry {
  std::string device_id;
  std::string data_address;
  Lifecycle lifecycle = Lifecycle::Idle;
  std::int64_t last_seen_ns = 0;
  bool reachable = true;
};

class ScenarioRejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RunBusy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidAnnotation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Management and control server: agent registry, scenario execution,
/// and the server-side data endpoint that terminates uplink flows and
/// sources downlink flows.
///
/// All methods must be called on the runtime's thread.
class Controller {
 public:
  using RunHandler = std::function<void(const RunRecord&)>;

  Controller(Runtime& runtime, MessageBus& bus, Transport& data, RunStore* store, ControllerOptions options = {});
  ~Controller();
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  void start();
  void stop();

  void register_agent(const StatusMessage& status);
  [[nodiscard]] std::vector<AgentEntry> agents() const;
  [[nodiscard]] std::optional<AgentEntry> agent(const std::string& device_id) const;
  [[nodiscard]] bool reachable(const std::string& device_id) const;

  /// Validates and starts a run; returns its id. Throws ScenarioRejected
  /// or RunBusy.
  std::string start_run(const Scenario& scenario);
  void abort_run(const std::string& run_id);
  RunRecord annotate_completion(const std::string& run_id, int execution_index, double completion_time_s);

  [[nodiscard]] bool run_active() const { return active_ != nullptr; }
  [[nodiscard]] std::optional<std::string> active_run_id() const;
  [[nodiscard]] std::optional<RunRecord> find_run(const std::string& run_id) const;
  [[nodiscard]] std::vector<RunRecord> completed_runs() const;

  void on_run_complete(RunHandler handler) { on_complete_ = std::move(handler); }
  [[nodiscard]] std::string data_address() const { return data_.local_address(); }
  [[nodiscard]] const TrafficEndpoint& reflector() const { return reflector_; }

 private:
  struct ActiveRun;

  void on_status(const Json& msg);
  void on_result(const Json& msg);
  void check_registry();
  void begin_execution();
  void on_ack_timeout(std::uint64_t generation);
  void arm_execution();
  void on_reflector_finished(EndpointRun&& run);
  void on_collect_timeout(std::uint64_t generation);
  void maybe_complete_execution();
  void complete_execution(bool timed_out);
  void finish_run(const std::string& status);
  void live_tick(std::uint64_t generation);
  void log(const std::string& kind, Json detail, bool store = true);
  void persist(const RunRecord& record);

  Runtime& runtime_;
  MessageBus& bus_;
  Transport& data_;
  RunStore* store_;
  ControllerOptions options_;
  TrafficEndpoint reflector_;
  std::map<std::string, AgentEntry> registry_;
  std::vector<SubscriptionId> subs_;
  std::optional<TimerId> registry_timer_;
  std::unique_ptr<ActiveRun> active_;
  std::map<std::string, RunRecord> completed_;
  RunHandler on_complete_;
  std::uint64_t run_counter_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace sting
