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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sting/bus.hpp"
#include "sting/control.hpp"
#include "sting/endpoint.hpp"

namespace sting {

struct AgentOptions {
  std::string device_id;
  std::int64_t heartbeat_interval_ns = 1'000'000'000;
  /// Replaces every flow seed (mixed with device and flow id) when set.
  std::optional<std::uint64_t> seed_override;
  /// Address advertised to the controller; defaults to the transport's.
  std::string data_address;
  /// Append-only JSON-lines spool of published results; empty disables.
  std::string spool_path;
};

struct ApplyResult {
  bool ok = false;
  std::string config_hash;
  std::string reason;
};

/// One published result, as seen on the results topic.
struct AgentResult {
  std::string run_id;
  int step = 0;
  std::string device_id;
  std::uint16_t flow_id = 0;
  Direction direction = Direction::Uplink;
  FlowRole role = FlowRole::Sender;
  bool partial = false;
  std::string config_hash;
  FlowReport report;
};

void to_json(Json& j, const AgentResult& r);
void from_json(const Json& j, AgentResult& r);

/// The distributed traffic device. Driven by config/command messages on the
/// control plane; keeps measurements local until the armed window closes.
class Agent {
 public:
  Agent(Runtime& runtime, MessageBus& bus, Transport& transport, AgentOptions options);
  ~Agent();
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  /// Subscribes to the control topics and starts heartbeating.
  void start();
  void stop();

  ApplyResult apply_config(const DeviceTrafficProfile& profile, const std::string& reflector,
                           std::int64_t window_ns = 1'000'000'000);
  /// Arms the staged profile. Results are published at stop_ns.
  void run(std::int64_t start_ns, std::int64_t stop_ns, const std::string& run_id = "local", int step = 0);
  void abort(const std::string& reason);

  [[nodiscard]] StatusMessage heartbeat() const;
  [[nodiscard]] Lifecycle lifecycle() const { return lifecycle_; }
  [[nodiscard]] const std::string& device_id() const { return options_.device_id; }
  [[nodiscard]] const std::vector<AgentResult>& last_results() const { return last_results_; }
  [[nodiscard]] const TrafficEndpoint& endpoint() const { return endpoint_; }
  [[nodiscard]] std::uint64_t runs_completed() const { return runs_completed_; }

  /// Derived per-flow seed used when a seed override is configured.
  static std::uint64_t mix_seed(std::uint64_t base, const std::string& device_id, std::uint16_t flow_id);

 private:
  void on_config(const Json& msg);
  void on_command(const Json& msg);
  void on_finished(EndpointRun&& run);
  void send_heartbeat();
  void publish_status(Json payload);

  Runtime& runtime_;
  MessageBus& bus_;
  Transport& transport_;
  AgentOptions options_;
  TrafficEndpoint endpoint_;
  Lifecycle lifecycle_ = Lifecycle::Idle;
  std::optional<DeviceTrafficProfile> profile_;
  std::string config_hash_;
  std::string reflector_;
  std::int64_t window_ns_ = 1'000'000'000;
  std::string run_id_;
  int step_ = 0;
  bool armed_ = false;
  std::set<std::string> seen_msgs_;
  std::vector<SubscriptionId> subs_;
  std::optional<TimerId> heartbeat_timer_;
  std::uint64_t generation_ = 0;
  std::vector<AgentResult> last_results_;
  std::uint64_t runs_completed_ = 0;
  std::uint64_t msg_counter_ = 0;
};

}  // namespace sting
