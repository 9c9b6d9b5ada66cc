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
#include <optional>
#include <string>
#include <vector>

#include "sting/channel.hpp"
#include "sting/metrics.hpp"
#include "sting/runtime.hpp"
#include "sting/traffic_model.hpp"

namespace sting {

/// Flows this endpoint sends to one peer.
struct OutboundFlows {
  std::string peer;
  DeviceTrafficProfile profile;
};

/// A flow this endpoint expects to receive from a peer.
struct InboundFlow {
  std::string peer;
  FlowSpec spec;
};

enum class FlowRole { Sender, Receiver };

struct EndpointFlowResult {
  std::string peer;
  std::uint16_t flow_id = 0;
  FlowRole role = FlowRole::Sender;
  FlowReport report;
};

struct EndpointRun {
  std::int64_t start_ns = 0;
  std::int64_t stop_ns = 0;
  bool partial = false;
  std::string failure;
  std::vector<EndpointFlowResult> results;
};

struct EndpointCounters {
  std::uint64_t sent = 0;
  std::uint64_t echoes_sent = 0;
  std::uint64_t received = 0;
  std::uint64_t undecodable = 0;
  std::uint64_t stale = 0;
  std::uint64_t unexpected = 0;
};

/// Data-plane engine: paces outbound flows from their merged schedules,
/// answers echo requests, and accumulates FlowMetrics for everything it
/// sends or receives during one armed window [start, stop).
///
/// Packets whose tx timestamp falls outside the window are treated as
/// stale and ignored, so stragglers from a previous window never leak into
/// the next one.
class TrafficEndpoint {
 public:
  using FinishHandler = std::function<void(EndpointRun&&)>;

  TrafficEndpoint(Runtime& runtime, Transport& transport);
  ~TrafficEndpoint();
  TrafficEndpoint(const TrafficEndpoint&) = delete;
  TrafficEndpoint& operator=(const TrafficEndpoint&) = delete;

  /// Arms a window. The handler fires once, at stop_ns (or on abort/failure).
  void arm(std::vector<OutboundFlows> outbound, std::vector<InboundFlow> inbound, std::int64_t start_ns,
           std::int64_t stop_ns, std::int64_t window_ns, FinishHandler on_finish);
  /// Ends the current window early; results are flagged partial.
  void abort(const std::string& reason);

  [[nodiscard]] bool armed() const { return armed_; }
  [[nodiscard]] bool running() const;
  [[nodiscard]] const EndpointCounters& counters() const { return counters_; }
  /// Consistent copies of the inbound accumulators (for live views).
  [[nodiscard]] std::vector<std::pair<InboundFlow, FlowMetrics>> inbound_snapshot() const;

 private:
  using Key = std::pair<std::string, std::uint16_t>;
  struct Sender {
    std::string peer;
    Schedule schedule;
    std::map<std::uint16_t, FlowSpec> specs;
  };

  void on_receive(Datagram&& d);
  void schedule_sender(std::size_t index);
  void fire_sender(std::size_t index);
  void finish(bool partial, const std::string& failure);
  std::optional<Key> match_inbound(const std::string& src, std::uint16_t flow_id) const;

  Runtime& runtime_;
  Transport& transport_;
  bool armed_ = false;
  std::int64_t start_ns_ = 0;
  std::int64_t stop_ns_ = 0;
  std::uint64_t generation_ = 0;
  std::vector<Sender> senders_;
  std::vector<TimerId> timers_;
  std::map<Key, FlowMetrics> outbound_metrics_;
  std::map<Key, FlowMetrics> inbound_metrics_;
  std::map<Key, InboundFlow> inbound_specs_;
  std::vector<std::uint8_t> buffer_;
  EndpointCounters counters_;
  FinishHandler on_finish_;
};

}  // namespace sting
