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

#include "sting/traffic_model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace sting {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void reject(const FlowSpec& flow, const std::string& what) {
  std::ostringstream os;
  os << "flow " << flow.flow_id << ": " << what;
  throw InvalidProfile(os.str());
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

double payload_bits(std::uint32_t bytes) { return static_cast<double>(bytes) * 8.0; }

// Number of k >= 0 with k * gap < window, tolerant of representation error
// when window is an exact multiple of gap.
std::uint64_t packets_per_window(double window, double gap) {
  const double n = window / gap;
  const double r = std::round(n);
  if (std::abs(n - r) <= 1e-9 * std::max(1.0, n)) return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(r));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
}

}  // namespace

std::uint16_t FlowSpec::fragment_count() const {
  if (kind != FlowKind::FrameVideo || payload_bytes == 0) return 1;
  const auto n = (static_cast<std::uint64_t>(frame_bytes) + payload_bytes - 1) / payload_bytes;
  return static_cast<std::uint16_t>(std::max<std::uint64_t>(1, n));
}

void validate(const FlowSpec& flow) {
  if (flow.payload_bytes < kProbeHeaderBytes) reject(flow, "payload_bytes below the 48-byte probe header");
  if (flow.payload_bytes > kMaxUdpPayloadBytes) reject(flow, "payload_bytes exceeds 65507");
  switch (flow.kind) {
    case FlowKind::ConstantStream:
      if (!positive(flow.target_rate_bps)) reject(flow, "target_rate_bps must be > 0");
      break;
    case FlowKind::PeriodicSensor:
    case FlowKind::BurstyTransfer:
      std::visit(overloaded{
                     [&](const DeterministicIat& m) {
                       if (!positive(m.period_s)) reject(flow, "period_s must be > 0");
                     },
                     [&](const ExponentialIat& m) {
                       if (!positive(m.mean_s)) reject(flow, "mean_s must be > 0");
                     },
                     [&](const OnOffIat& m) {
                       if (!positive(m.on_s) || !positive(m.off_s)) reject(flow, "on_s and off_s must be > 0");
                       if (!positive(m.burst_rate_bps)) reject(flow, "burst_rate_bps must be > 0");
                     },
                 },
                 flow.iat_model);
      break;
    case FlowKind::FrameVideo: {
      if (!positive(flow.frame_rate_hz)) reject(flow, "frame_rate_hz must be > 0");
      if (flow.frame_bytes < flow.payload_bytes) reject(flow, "frame_bytes must be >= payload_bytes");
      if (!positive(flow.frame_deadline_ms)) reject(flow, "frame_deadline_ms must be > 0");
      const auto n = (static_cast<std::uint64_t>(flow.frame_bytes) + flow.payload_bytes - 1) / flow.payload_bytes;
      if (n > 0xFFFF) reject(flow, "frame needs more than 65535 fragments");
      const auto tail = flow.frame_bytes - (n - 1) * flow.payload_bytes;
      if (tail < kProbeHeaderBytes) reject(flow, "last fragment would be smaller than the probe header");
      break;
    }
  }
}

void validate(const DeviceTrafficProfile& profile) {
  if (profile.device_id.empty()) throw InvalidProfile("device_id is empty");
  std::set<std::uint16_t> ids;
  for (const auto& flow : profile.flows) {
    validate(flow);
    if (!ids.insert(flow.flow_id).second) reject(flow, "duplicate flow_id");
  }
}

double offered_load(const FlowSpec& flow) {
  switch (flow.kind) {
    case FlowKind::ConstantStream:
      return flow.target_rate_bps;
    case FlowKind::FrameVideo:
      return flow.frame_rate_hz * payload_bits(flow.frame_bytes);
    case FlowKind::PeriodicSensor:
    case FlowKind::BurstyTransfer:
      return std::visit(overloaded{
                            [&](const DeterministicIat& m) { return payload_bits(flow.payload_bytes) / m.period_s; },
                            [&](const ExponentialIat& m) { return payload_bits(flow.payload_bytes) / m.mean_s; },
                            [&](const OnOffIat& m) { return m.burst_rate_bps * m.on_s / (m.on_s + m.off_s); },
                        },
                        flow.iat_model);
  }
  return 0.0;
}

double offered_load(const DeviceTrafficProfile& profile) {
  double sum = 0.0;
  for (const auto& flow : profile.flows) sum += offered_load(flow);
  return sum;
}

const char* to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::ConstantStream: return "constant_stream";
    case FlowKind::PeriodicSensor: return "periodic_sensor";
    case FlowKind::BurstyTransfer: return "bursty_transfer";
    case FlowKind::FrameVideo: return "frame_video";
  }
  return "?";
}

const char* to_string(Direction direction) { return direction == Direction::Uplink ? "uplink" : "downlink"; }
const char* to_string(Pacing pacing) { return pacing == Pacing::Paced ? "paced" : "poisson"; }

std::optional<FlowKind> flow_kind_from_string(const std::string& s) {
  for (auto k : {FlowKind::ConstantStream, FlowKind::PeriodicSensor, FlowKind::BurstyTransfer, FlowKind::FrameVideo})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::optional<Direction> direction_from_string(const std::string& s) {
  if (s == "uplink") return Direction::Uplink;
  if (s == "downlink") return Direction::Downlink;
  return std::nullopt;
}

std::optional<Pacing> pacing_from_string(const std::string& s) {
  if (s == "paced") return Pacing::Paced;
  if (s == "poisson") return Pacing::Poisson;
  return std::nullopt;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double sample_exponential(std::mt19937_64& rng, double mean) { return -mean * std::log1p(-unit_uniform(rng)); }

Schedule::Schedule(const DeviceTrafficProfile& profile, std::int64_t start_ns) {
  validate(profile);
  flows_.reserve(profile.flows.size());
  for (const auto& spec : profile.flows) {
    FlowState state;
    state.spec = spec;
    state.rng.seed(spec.seed);
    state.start_ns = start_ns;
    flows_.push_back(std::move(state));
  }
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    prime(flows_[i]);
    heap_.push({flows_[i].pending.time_ns, flows_[i].spec.flow_id, i});
  }
}

const Departure& Schedule::peek() const {
  if (heap_.empty()) throw std::logic_error("Schedule::peek on empty schedule");
  return flows_[heap_.top().index].pending;
}

Departure Schedule::next() {
  if (heap_.empty()) throw std::logic_error("Schedule::next on empty schedule");
  const auto top = heap_.top();
  heap_.pop();
  auto& flow = flows_[top.index];
  Departure out = flow.pending;
  advance(flow);
  heap_.push({flow.pending.time_ns, flow.spec.flow_id, top.index});
  return out;
}

void Schedule::prime(FlowState& flow) {
  const auto& spec = flow.spec;
  flow.fragment_count = spec.fragment_count();
  switch (spec.kind) {
    case FlowKind::ConstantStream:
      flow.clock_s = spec.pacing == Pacing::Poisson
                         ? sample_exponential(flow.rng, payload_bits(spec.payload_bytes) / spec.target_rate_bps)
                         : 0.0;
      break;
    case FlowKind::PeriodicSensor:
    case FlowKind::BurstyTransfer:
      if (const auto* m = std::get_if<ExponentialIat>(&spec.iat_model)) {
        flow.clock_s = sample_exponential(flow.rng, m->mean_s);
      } else if (const auto* m = std::get_if<OnOffIat>(&spec.iat_model)) {
        flow.per_burst = packets_per_window(m->on_s, payload_bits(spec.payload_bytes) / m->burst_rate_bps);
        flow.clock_s = 0.0;
      } else {
        flow.clock_s = 0.0;
      }
      break;
    case FlowKind::FrameVideo:
      flow.clock_s = 0.0;
      break;
  }
  flow.pending = Departure{};
  flow.pending.flow_id = spec.flow_id;
  flow.pending.seq = flow.next_seq++;
  flow.pending.time_ns = flow.start_ns + std::llround(flow.clock_s * 1e9);
  flow.pending.fragment_count = flow.fragment_count;
  flow.pending.payload_bytes = spec.payload_bytes;
  if (spec.kind == FlowKind::FrameVideo && flow.fragment_count == 1) flow.pending.payload_bytes = spec.frame_bytes;
}

void Schedule::advance(FlowState& flow) {
  const auto& spec = flow.spec;
  std::uint32_t bytes = spec.payload_bytes;
  switch (spec.kind) {
    case FlowKind::ConstantStream: {
      const double gap = payload_bits(spec.payload_bytes) / spec.target_rate_bps;
      if (spec.pacing == Pacing::Poisson) {
        flow.clock_s += sample_exponential(flow.rng, gap);
      } else {
        ++flow.period_index;
        flow.clock_s = static_cast<double>(flow.period_index) * gap;
      }
      break;
    }
    case FlowKind::PeriodicSensor:
    case FlowKind::BurstyTransfer:
      if (const auto* m = std::get_if<ExponentialIat>(&spec.iat_model)) {
        flow.clock_s += sample_exponential(flow.rng, m->mean_s);
      } else if (const auto* m = std::get_if<OnOffIat>(&spec.iat_model)) {
        if (++flow.in_burst == flow.per_burst) {
          flow.in_burst = 0;
          ++flow.burst_index;
        }
        const double gap = payload_bits(spec.payload_bytes) / m->burst_rate_bps;
        flow.clock_s = static_cast<double>(flow.burst_index) * (m->on_s + m->off_s) +
                       static_cast<double>(flow.in_burst) * gap;
      } else {
        const auto& d = std::get<DeterministicIat>(spec.iat_model);
        ++flow.period_index;
        flow.clock_s = static_cast<double>(flow.period_index) * d.period_s;
      }
      break;
    case FlowKind::FrameVideo:
      if (++flow.fragment_index == flow.fragment_count) {
        flow.fragment_index = 0;
        ++flow.frame_id;
        flow.clock_s = static_cast<double>(flow.frame_id) / spec.frame_rate_hz;
      }
      if (flow.fragment_index + 1 == flow.fragment_count)
        bytes = spec.frame_bytes - (flow.fragment_count - 1u) * spec.payload_bytes;
      break;
  }
  flow.pending.time_ns = flow.start_ns + std::llround(flow.clock_s * 1e9);
  flow.pending.seq = flow.next_seq++;
  flow.pending.frame_id = flow.frame_id;
  flow.pending.fragment_index = flow.fragment_index;
  flow.pending.payload_bytes = bytes;
}

}  // namespace sting
