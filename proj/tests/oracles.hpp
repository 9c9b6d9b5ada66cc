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

// Independent reference computations used by the tests. Nothing here calls
// into the streaming implementations it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "sting/metrics.hpp"

namespace oracle {

struct Arrival {
  sting::ProbePacket packet;
  std::int64_t rx_ns = 0;
  std::uint32_t wire_bytes = 0;
};

struct Trace {
  std::uint16_t flow_id = 0;
  sting::MetricsConfig config;
  std::vector<Arrival> arrivals;  // arrival order
  std::vector<std::uint32_t> sent;  // wire size of every transmitted packet
  std::int64_t end_ns = 0;
};

inline double interpolate(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = lo + 1 < sorted.size() ? lo + 1 : lo;
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (h - static_cast<double>(lo));
}

inline std::size_t window_index(const sting::MetricsConfig& c, std::int64_t rx) {
  return rx <= c.origin_ns ? 0 : static_cast<std::size_t>((rx - c.origin_ns) / c.window_ns);
}

/// Recomputes a FlowReport from the whole trace at once.
inline sting::FlowReport brute_force(const Trace& t) {
  const auto& c = t.config;
  std::vector<const Arrival*> data, replies;
  for (const auto& a : t.arrivals)
    (a.packet.type == sting::PacketType::EchoReply ? replies : data).push_back(&a);

  std::set<std::uint64_t> seen;
  std::vector<const Arrival*> unique;
  std::uint64_t dups = 0;
  for (const auto* a : data) {
    if (seen.insert(a->packet.seq).second)
      unique.push_back(a);
    else
      ++dups;
  }

  std::size_t used = 0;
  for (const auto* a : unique) used = std::max(used, window_index(c, a->rx_ns) + 1);
  for (const auto* a : replies) used = std::max(used, window_index(c, a->rx_ns) + 1);
  std::size_t n = used;
  if (t.end_ns > c.origin_ns) {
    const std::int64_t span = t.end_ns - c.origin_ns;
    n = std::max<std::size_t>(n, static_cast<std::size_t>(span / c.window_ns + (span % c.window_ns ? 1 : 0)));
  }

  sting::FlowReport r;
  r.flow_id = t.flow_id;
  r.origin_ns = c.origin_ns;
  r.end_ns = t.end_ns;
  r.window_ns = c.window_ns;
  r.windows.resize(n);
  const double window_s = static_cast<double>(c.window_ns) * 1e-9;
  std::vector<std::int64_t> rtt_sum(n, 0);
  for (std::size_t i = 0; i < n; ++i) r.windows[i].start_ns = c.origin_ns + static_cast<std::int64_t>(i) * c.window_ns;
  for (const auto* a : unique) {
    auto& w = r.windows[window_index(c, a->rx_ns)];
    w.rx_bytes += a->wire_bytes;
    ++w.rx_packets;
    r.rx_bytes += a->wire_bytes;
  }
  for (const auto* a : replies) {
    const auto& p = a->packet;
    const std::int64_t rtt = (a->rx_ns - static_cast<std::int64_t>(p.tx_timestamp_ns)) -
                             (static_cast<std::int64_t>(p.responder_tx_ns) - static_cast<std::int64_t>(p.responder_rx_ns));
    r.rtt_samples_ns.push_back(rtt);
    const auto i = window_index(c, a->rx_ns);
    ++r.windows[i].rtt_count;
    rtt_sum[i] += rtt;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& w = r.windows[i];
    w.throughput_bps = static_cast<double>(w.rx_bytes) * 8.0 / window_s;
    w.rtt_mean_ns = w.rtt_count ? static_cast<double>(rtt_sum[i]) / static_cast<double>(w.rtt_count) : 0.0;
  }

  r.tx_packets = t.sent.size();
  for (auto b : t.sent) r.tx_bytes += b;
  r.rx_packets = unique.size();
  r.duplicate_count = dups;
  if (!unique.empty()) {
    std::uint64_t m = 0;
    for (const auto* a : unique) m = std::max(m, a->packet.seq);
    r.max_seq = m;
    r.loss_ratio = (static_cast<double>(m) + 1.0 - static_cast<double>(unique.size())) / (static_cast<double>(m) + 1.0);
  }
  r.mean_throughput_bps = n ? static_cast<double>(r.rx_bytes) * 8.0 / (static_cast<double>(n) * window_s) : 0.0;

  if (!r.rtt_samples_ns.empty()) {
    std::vector<double> sorted(r.rtt_samples_ns.begin(), r.rtt_samples_ns.end());
    std::sort(sorted.begin(), sorted.end());
    std::int64_t sum = 0;
    for (auto v : r.rtt_samples_ns) sum += v;
    sting::RttSummary s;
    s.count = sorted.size();
    s.mean_ns = static_cast<double>(sum) / static_cast<double>(s.count);
    s.p50_ns = interpolate(sorted, 0.5);
    s.p95_ns = interpolate(sorted, 0.95);
    s.max_ns = sorted.back();
    r.rtt = s;
  }

  double jitter = 0.0;
  for (std::size_t i = 1; i < unique.size(); ++i) {
    const std::int64_t prev = unique[i - 1]->rx_ns - static_cast<std::int64_t>(unique[i - 1]->packet.tx_timestamp_ns);
    const std::int64_t cur = unique[i]->rx_ns - static_cast<std::int64_t>(unique[i]->packet.tx_timestamp_ns);
    jitter += (std::abs(static_cast<double>(cur - prev)) - jitter) / 16.0;
  }
  r.jitter_ns = jitter;

  if (c.track_frames && !unique.empty()) {
    std::map<std::uint32_t, std::vector<const Arrival*>> frames;
    for (const auto* a : unique) frames[a->packet.frame_id].push_back(a);
    std::uint64_t on_time = 0;
    for (const auto& [id, parts] : frames) {
      const auto count = parts.front()->packet.fragment_count;
      std::set<std::uint16_t> got;
      std::optional<std::int64_t> done;
      for (const auto* a : parts) {
        if (a->packet.fragment_index < count) got.insert(a->packet.fragment_index);
        if (!done && got.size() == count) done = a->rx_ns;
      }
      const std::int64_t first = parts.front()->rx_ns;
      if (done && *done - first <= c.frame_deadline_ns) {
        ++on_time;
      } else {
        const auto i = window_index(c, first);
        if (i < n) ++r.windows[i].frames_dropped;
      }
    }
    r.frames_total = static_cast<std::uint64_t>(frames.rbegin()->first) + 1;
    r.frames_dropped = r.frames_total - on_time;
  }
  return r;
}

struct TraceShape {
  std::size_t packets = 1000;
  double loss = 0.0;
  double duplicate = 0.0;
  double reorder_spread_ns = 0.0;
  double echo_fraction = 0.0;
  bool frames = false;
  std::uint16_t fragments = 4;
};

/// Sender-side sequence with loss, duplication, reordering, and interleaved
/// echo replies injected.
inline Trace make_trace(std::mt19937_64& rng, const TraceShape& shape) {
  Trace t;
  t.flow_id = static_cast<std::uint16_t>(rng() % 1000);
  t.config.origin_ns = static_cast<std::int64_t>(rng() % 1'000'000'000);
  t.config.window_ns = std::int64_t{1} << (20 + rng() % 12);
  t.config.frame_deadline_ns = 1'000'000 + static_cast<std::int64_t>(rng() % 50'000'000);
  t.config.track_frames = shape.frames;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> gap(1'000, 400'000);
  std::uniform_int_distribution<std::int64_t> base_delay(100'000, 2'000'000);
  std::uniform_int_distribution<std::uint32_t> size(48, 1500);

  std::vector<Arrival> all;
  std::int64_t tx = t.config.origin_ns + static_cast<std::int64_t>(rng() % 1'000'000);
  for (std::size_t i = 0; i < shape.packets; ++i) {
    tx += gap(rng);
    sting::ProbePacket p;
    p.flow_id = t.flow_id;
    p.seq = i;
    p.tx_timestamp_ns = static_cast<std::uint64_t>(tx);
    if (shape.frames) {
      p.frame_id = static_cast<std::uint32_t>(i / shape.fragments);
      p.fragment_count = shape.fragments;
      p.fragment_index = static_cast<std::uint16_t>(i % shape.fragments);
    }
    const auto bytes = size(rng);
    t.sent.push_back(bytes);
    if (u(rng) < shape.echo_fraction) {
      auto reply = p;
      reply.type = sting::PacketType::EchoReply;
      reply.responder_rx_ns = static_cast<std::uint64_t>(tx + base_delay(rng));
      reply.responder_tx_ns = reply.responder_rx_ns + rng() % 5000;
      const auto rx = static_cast<std::int64_t>(reply.responder_tx_ns) + base_delay(rng);
      if (u(rng) >= shape.loss) all.push_back({reply, rx, 48});
      continue;
    }
    if (u(rng) < shape.loss) continue;
    const auto spread = shape.reorder_spread_ns > 0 ? static_cast<std::int64_t>(u(rng) * shape.reorder_spread_ns) : 0;
    all.push_back({p, tx + base_delay(rng) + spread, bytes});
    while (u(rng) < shape.duplicate)
      all.push_back({p, tx + base_delay(rng) + static_cast<std::int64_t>(u(rng) * 5e6), bytes});
  }
  std::stable_sort(all.begin(), all.end(), [](const Arrival& a, const Arrival& b) { return a.rx_ns < b.rx_ns; });
  t.arrivals = std::move(all);
  t.end_ns = (t.arrivals.empty() ? tx : t.arrivals.back().rx_ns) + static_cast<std::int64_t>(rng() % 3'000'000'000);
  return t;
}

/// Kolmogorov-Smirnov statistic of a sample against Exp(mean).
inline double ks_exponential(std::vector<double> x, double mean) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-x[i] / mean);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Asymptotic p-value of the KS statistic (Stephens' small-sample correction).
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline sting::FlowReport stream(const Trace& t) {
  sting::FlowMetrics m(t.flow_id, t.config);
  for (auto b : t.sent) m.record_sent(b);
  for (const auto& a : t.arrivals) m.ingest(a.packet, a.rx_ns, a.wire_bytes);
  return m.finalize(t.end_ns);
}

}  // namespace oracle
