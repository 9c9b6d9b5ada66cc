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
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sting/probe_protocol.hpp"

namespace sting {

struct WindowSample {
  std::int64_t start_ns = 0;
  std::uint64_t rx_bytes = 0;
  std::uint64_t rx_packets = 0;
  double throughput_bps = 0.0;
  std::uint64_t rtt_count = 0;
  double rtt_mean_ns = 0.0;
  /// Frames whose first fragment arrived in this window and that missed the
  /// deadline. Frames that never arrived at all only appear in the totals.
  std::uint64_t frames_dropped = 0;

  bool operator==(const WindowSample&) const = default;
};

struct RttSummary {
  std::uint64_t count = 0;
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p95_ns = 0.0;
  double max_ns = 0.0;

  bool operator==(const RttSummary&) const = default;
};

struct FlowReport {
  std::uint16_t flow_id = 0;
  std::int64_t origin_ns = 0;
  std::int64_t end_ns = 0;
  std::int64_t window_ns = 1'000'000'000;
  std::vector<WindowSample> windows;
  std::uint64_t tx_packets = 0;
  std::uint64_t tx_bytes = 0;
  std::uint64_t rx_packets = 0;
  std::uint64_t rx_bytes = 0;
  std::uint64_t duplicate_count = 0;
  std::optional<std::uint64_t> max_seq;
  std::optional<double> loss_ratio;
  double mean_throughput_bps = 0.0;
  std::optional<RttSummary> rtt;
  std::vector<std::int64_t> rtt_samples_ns;
  double jitter_ns = 0.0;
  std::uint64_t frames_total = 0;
  std::uint64_t frames_dropped = 0;

  bool operator==(const FlowReport&) const = default;
};

struct MetricsConfig {
  std::int64_t origin_ns = 0;
  std::int64_t window_ns = 1'000'000'000;
  std::int64_t frame_deadline_ns = 100'000'000;
  bool track_frames = false;
};

/// Streaming per-flow accumulator. Data and echo-request packets feed the
/// receive side (windows, loss, jitter, frames); echo replies feed RTT.
/// Not thread-safe; copy to snapshot.
class FlowMetrics {
 public:
  FlowMetrics(std::uint16_t flow_id, MetricsConfig config);

  void ingest(const ProbePacket& packet, std::int64_t rx_ns, std::uint32_t wire_bytes);
  void record_sent(std::uint32_t wire_bytes);

  [[nodiscard]] FlowReport finalize(std::int64_t end_ns) const;
  [[nodiscard]] std::uint64_t frame_drops() const;

  [[nodiscard]] std::uint16_t flow_id() const { return flow_id_; }
  [[nodiscard]] const MetricsConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t received_count() const { return received_; }
  [[nodiscard]] std::uint64_t duplicate_count() const { return duplicates_; }
  [[nodiscard]] std::uint64_t rx_bytes() const { return rx_bytes_; }
  [[nodiscard]] std::optional<std::uint64_t> max_seq() const { return max_seq_; }
  [[nodiscard]] double jitter_ns() const { return jitter_; }
  [[nodiscard]] std::size_t window_count() const { return windows_.size(); }

 private:
  struct Window {
    std::uint64_t rx_bytes = 0;
    std::uint64_t rx_packets = 0;
    std::uint64_t rtt_count = 0;
    std::int64_t rtt_sum = 0;
  };
  struct Frame {
    std::uint16_t fragment_count = 1;
    std::uint16_t received = 0;
    std::vector<bool> have;
    std::int64_t first_ns = 0;
    std::optional<std::int64_t> complete_ns;
  };

  Window& window_at(std::int64_t rx_ns);
  bool mark_seen(std::uint64_t seq);
  void ingest_frame(const ProbePacket& packet, std::int64_t rx_ns);
  [[nodiscard]] bool frame_on_time(const Frame& frame) const;

  std::uint16_t flow_id_;
  MetricsConfig config_;
  std::vector<Window> windows_;
  std::vector<bool> seen_dense_;
  std::unordered_set<std::uint64_t> seen_sparse_;
  std::uint64_t received_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t rx_bytes_ = 0;
  std::uint64_t tx_packets_ = 0;
  std::uint64_t tx_bytes_ = 0;
  std::optional<std::uint64_t> max_seq_;
  std::optional<std::int64_t> prev_transit_;
  double jitter_ = 0.0;
  std::vector<std::int64_t> rtt_samples_;
  std::unordered_map<std::uint32_t, Frame> frames_;
  std::optional<std::uint32_t> max_frame_id_;
};

/// Combines the receiver's view of a flow with the sender's (tx counters
/// and RTT from echo replies).
FlowReport merge_reports(const FlowReport& receiver, const FlowReport& sender);

}  // namespace sting
