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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sting/codec.hpp"

namespace sting {

struct Step {
  std::string label;
  std::vector<std::string> active_devices;
  std::map<std::string, DeviceTrafficProfile> profiles;
  double duration_s = 60.0;
  int repetitions = 1;
  /// Untracked executions (warm-up runs) take no completion annotation.
  bool tracked = true;

  bool operator==(const Step&) const = default;
};

struct TransportConfig {
  std::string kind = "emulated";  // "emulated" | "udp"
  ChannelConfig channel;

  bool operator==(const TransportConfig& o) const {
    return kind == o.kind && channel.capacity_bps == o.channel.capacity_bps &&
           channel.propagation_ns == o.channel.propagation_ns && channel.buffer_bytes == o.channel.buffer_bytes;
  }
};

struct Scenario {
  std::string scenario_id;
  std::vector<Step> steps;
  /// Devices carrying the system under test; every other active device is
  /// counted as an interferer.
  std::vector<std::string> sut_devices;
  TransportConfig transport;
  double window_s = 1.0;
  Json metadata = Json::object();

  bool operator==(const Scenario&) const = default;
};

/// Throws SchemaError describing the first problem found.
void validate(const Scenario& scenario);
std::size_t interferer_count(const Scenario& scenario, const Step& step);
std::vector<std::string> referenced_devices(const Scenario& scenario);

void to_json(Json& j, const Step& s);
void from_json(const Json& j, Step& s);
void to_json(Json& j, const TransportConfig& t);
void from_json(const Json& j, TransportConfig& t);
void to_json(Json& j, const Scenario& s);
void from_json(const Json& j, Scenario& s);

Scenario load_scenario_file(const std::string& path);

struct DeviceFlowResult {
  std::string device_id;
  std::uint16_t flow_id = 0;
  Direction direction = Direction::Uplink;
  bool partial = false;
  FlowReport report;

  bool operator==(const DeviceFlowResult&) const = default;
};

/// One executed repetition of one scenario step.
struct StepExecution {
  int index = 0;
  int step_index = 0;
  int repetition = 0;
  std::string label;
  bool tracked = true;
  std::vector<std::string> active_devices;
  std::size_t interferer_count = 0;
  std::int64_t start_ns = 0;
  std::int64_t stop_ns = 0;
  double offered_load_bps = 0.0;
  std::string status = "pending";  // completed | partial | ack_timeout | rejected | aborted
  std::map<std::string, std::string> config_hashes;
  std::vector<DeviceFlowResult> results;
  std::optional<double> completion_time_s;

  bool operator==(const StepExecution&) const = default;
};

struct RunEvent {
  std::int64_t t_ns = 0;
  std::string kind;
  Json detail = Json::object();

  bool operator==(const RunEvent&) const = default;
};

struct RunRecord {
  std::string run_id;
  Json scenario;
  std::int64_t created_at_ns = 0;
  std::int64_t finished_at_ns = 0;
  std::string status = "active";  // active | completed | partial | aborted
  std::vector<StepExecution> executions;
  std::vector<RunEvent> events;

  bool operator==(const RunRecord&) const = default;
};

void to_json(Json& j, const DeviceFlowResult& r);
void from_json(const Json& j, DeviceFlowResult& r);
void to_json(Json& j, const StepExecution& e);
void from_json(const Json& j, StepExecution& e);
void to_json(Json& j, const RunEvent& e);
void from_json(const Json& j, RunEvent& e);
void to_json(Json& j, const RunRecord& r);
void from_json(const Json& j, RunRecord& r);

}  // namespace sting
