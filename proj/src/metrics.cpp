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

#include "sting/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sting/stats.hpp"

namespace sting {
namespace {

constexpr std::uint64_t kDenseSeqLimit = std::uint64_t{1} << 27;

}  // namespace

FlowMetrics::FlowMetrics(std::uint16_t flow_id, MetricsConfig config) : flow_id_(flow_id), config_(config) {
  if (config_.window_ns <= 0) throw std::invalid_argument("window_ns must be > 0");
}

FlowMetrics::Window& FlowMetrics::window_at(std::int64_t rx_ns) {
  const std::int64_t offset = std::max<std::int64_t>(0, rx_ns - config_.origin_ns);
  const auto index = static_cast<std::size_t>(offset / config_.window_ns);
  if (index >= windows_.size()) windows_.resize(index + 1);
  return windows_[index];
}

bool FlowMetrics::mark_seen(std::uint64_t seq) {
  if (seq < kDenseSeqLimit) {
    if (seq >= seen_dense_.size()) seen_dense_.resize(std::max<std::uint64_t>(seq + 1, seen_dense_.size() * 2));
    if (seen_dense_[seq]) return false;
    seen_dense_[seq] = true;
    return true;
  }
  return seen_sparse_.insert(seq).second;
}

void FlowMetrics::record_sent(std::uint32_t wire_bytes) {
  ++tx_packets_;
  tx_bytes_ += wire_bytes;
}

void FlowMetrics::ingest(const ProbePacket& packet, std::int64_t rx_ns, std::uint32_t wire_bytes) {
  if (packet.type == PacketType::EchoReply) {
    const auto rtt = round_trip_ns(packet, static_cast<std::uint64_t>(rx_ns));
    rtt_samples_.push_back(rtt);
    auto& w = window_at(rx_ns);
    ++w.rtt_count;
    w.rtt_sum += rtt;
    return;
  }
  if (!mark_seen(packet.seq)) {
    ++duplicates_;
    return;
  }
  ++received_;
  rx_bytes_ += wire_bytes;
  max_seq_ = std::max(max_seq_.value_or(0), packet.seq);
  auto& w = window_at(rx_ns);
  w.rx_bytes += wire_bytes;
  ++w.rx_packets;

  // RFC 3550 interarrival jitter over arrival order.
  const std::int64_t transit = rx_ns - static_cast<std::int64_t>(packet.tx_timestamp_ns);
  if (prev_transit_) {
    const double d = std::abs(static_cast<double>(transit - *prev_transit_));
    jitter_ += (d - jitter_) / 16.0;
  }
  prev_transit_ = transit;

  if (config_.track_frames) ingest_frame(packet, rx_ns);
}

void FlowMetrics::ingest_frame(const ProbePacket& packet, std::int64_t rx_ns) {
  auto [it, inserted] = frames_.try_emplace(packet.frame_id);
  Frame& frame = it->second;
  if (inserted) {
    frame.fragment_count = packet.fragment_count;
    frame.have.assign(packet.fragment_count, false);
    frame.first_ns = rx_ns;
    max_frame_id_ = std::max(max_frame_id_.value_or(0), packet.frame_id);
  }
  if (packet.fragment_index >= frame.have.size() || frame.have[packet.fragment_index]) return;
  frame.have[packet.fragment_index] = true;
  if (++frame.received == frame.fragment_count) frame.complete_ns = rx_ns;
}

bool FlowMetrics::frame_on_time(const Frame& frame) const {
  return frame.complete_ns && *frame.complete_ns - frame.first_ns <= config_.frame_deadline_ns;
}

std::uint64_t FlowMetrics::frame_drops() const {
  if (!max_frame_id_) return 0;
  std::uint64_t on_time = 0;
  for (const auto& [id, frame] : frames_)
    if (frame_on_time(frame)) ++on_time;
  return static_cast<std::uint64_t>(*max_frame_id_) + 1 - on_time;
}

FlowReport FlowMetrics::finalize(std::int64_t end_ns) const {
  FlowReport r;
  r.flow_id = flow_id_;
  r.origin_ns = config_.origin_ns;
  r.end_ns = end_ns;
  r.window_ns = config_.window_ns;

  std::size_t n = windows_.size();
  if (end_ns > config_.origin_ns) {
    const auto span = end_ns - config_.origin_ns;
    n = std::max<std::size_t>(n, static_cast<std::size_t>((span + config_.window_ns - 1) / config_.window_ns));
  }
  r.windows.resize(n);
  const double window_s = static_cast<double>(config_.window_ns) * 1e-9;
  for (std::size_t i = 0; i < n; ++i) {
    auto& out = r.windows[i];
    out.start_ns = config_.origin_ns + static_cast<std::int64_t>(i) * config_.window_ns;
    if (i < windows_.size()) {
      const auto& w = windows_[i];
      out.rx_bytes = w.rx_bytes;
      out.rx_packets = w.rx_packets;
      out.throughput_bps = static_cast<double>(w.rx_bytes) * 8.0 / window_s;
      out.rtt_count = w.rtt_count;
      out.rtt_mean_ns = w.rtt_count ? static_cast<double>(w.rtt_sum) / static_cast<double>(w.rtt_count) : 0.0;
    }
  }
  for (const auto& [id, frame] : frames_) {
    if (frame_on_time(frame)) continue;
    const std::int64_t offset = std::max<std::int64_t>(0, frame.first_ns - config_.origin_ns);
    const auto index = static_cast<std::size_t>(offset / config_.window_ns);
    if (index < r.windows.size()) ++r.windows[index].frames_dropped;
  }

  r.tx_packets = tx_packets_;
  r.tx_bytes = tx_bytes_;
  r.rx_packets = received_;
  r.rx_bytes = rx_bytes_;
  r.duplicate_count = duplicates_;
  r.max_seq = max_seq_;
  if (max_seq_) {
    const double expected = static_cast<double>(*max_seq_) + 1.0;
    r.loss_ratio = (expected - static_cast<double>(received_)) / expected;
  }
  r.mean_throughput_bps = n ? static_cast<double>(rx_bytes_) * 8.0 / (static_cast<double>(n) * window_s) : 0.0;

  r.rtt_samples_ns = rtt_samples_;
  if (!rtt_samples_.empty()) {
    std::vector<double> sorted(rtt_samples_.begin(), rtt_samples_.end());
    std::sort(sorted.begin(), sorted.end());
    std::int64_t sum = 0;
    for (auto v : rtt_samples_) sum += v;
    RttSummary s;
    s.count = rtt_samples_.size();
    s.mean_ns = static_cast<double>(sum) / static_cast<double>(s.count);
    s.p50_ns = stats::percentile_sorted(sorted, 0.50);
    s.p95_ns = stats::percentile_sorted(sorted, 0.95);
    s.max_ns = sorted.back();
    r.rtt = s;
  }
  r.jitter_ns = jitter_;
  r.frames_total = max_frame_id_ ? static_cast<std::uint64_t>(*max_frame_id_) + 1 : 0;
  r.frames_dropped = frame_drops();
  return r;
}

FlowReport merge_reports(const FlowReport& receiver, const FlowReport& sender) {
  FlowReport out = receiver;
  out.tx_packets = sender.tx_packets;
  out.tx_bytes = sender.tx_bytes;
  out.rtt = sender.rtt;
  out.rtt_samples_ns = sender.rtt_samples_ns;
  if (out.windows.size() < sender.windows.size()) {
    const auto old = out.windows.size();
    out.windows.resize(sender.windows.size());
    for (std::size_t i = old; i < out.windows.size(); ++i) out.windows[i].start_ns = sender.windows[i].start_ns;
  }
  for (std::size_t i = 0; i < out.windows.size(); ++i) {
    const bool has = i < sender.windows.size();
    out.windows[i].rtt_count = has ? sender.windows[i].rtt_count : 0;
    out.windows[i].rtt_mean_ns = has ? sender.windows[i].rtt_mean_ns : 0.0;
  }
  return out;
}

}  // namespace sting
