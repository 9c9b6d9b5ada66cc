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
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sting {

inline constexpr std::uint32_t kProbeHeaderBytes = 48;
inline constexpr std::uint32_t kMaxUdpPayloadBytes = 65507;

enum class FlowKind { ConstantStream, PeriodicSensor, BurstyTransfer, FrameVideo };
enum class Direction { Uplink, Downlink };

/// Departure spacing of a ConstantStream. Paced streams are strictly periodic;
/// Poisson streams draw exponential gaps with the same mean.
enum class Pacing { Paced, Poisson };

struct DeterministicIat {
  double period_s = 1.0;
  bool operator==(const DeterministicIat&) const = default;
};

struct ExponentialIat {
  double mean_s = 1.0;
  bool operator==(const ExponentialIat&) const = default;
};

struct OnOffIat {
  double on_s = 1.0;
  double off_s = 1.0;
  double burst_rate_bps = 1e6;
  bool operator==(const OnOffIat&) const = default;
};

using IatModel = std::variant<DeterministicIat, ExponentialIat, OnOffIat>;

/// One emulated application traffic pattern.
///
/// ConstantStream derives its spacing from target_rate_bps and pacing.
/// PeriodicSensor and BurstyTransfer use iat_model. FrameVideo sends
/// ceil(frame_bytes / payload_bytes) fragments back to back every
/// 1 / frame_rate_hz seconds.
struct FlowSpec {
  std::uint16_t flow_id = 0;
  FlowKind kind = FlowKind::ConstantStream;
  Direction direction = Direction::Uplink;
  double target_rate_bps = 0.0;
  std::uint32_t payload_bytes = 1250;
  IatModel iat_model = DeterministicIat{};
  Pacing pacing = Pacing::Paced;
  double frame_rate_hz = 0.0;
  std::uint32_t frame_bytes = 0;
  double frame_deadline_ms = 100.0;
  /// Every Nth packet is sent as an echo request (0 disables RTT probing).
  std::uint32_t echo_every = 0;
  std::uint64_t seed = 1;

  bool operator==(const FlowSpec&) const = default;

  [[nodiscard]] std::uint16_t fragment_count() const;
};

struct DeviceTrafficProfile {
  std::string device_id;
  std::vector<FlowSpec> flows;

  bool operator==(const DeviceTrafficProfile&) const = default;
};

class InvalidProfile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidProfile with a human-readable reason.
void validate(const FlowSpec& flow);
void validate(const DeviceTrafficProfile& profile);

/// Long-run mean payload bits per second (headers are part of the payload).
[[nodiscard]] double offered_load(const FlowSpec& flow);
[[nodiscard]] double offered_load(const DeviceTrafficProfile& profile);

const char* to_string(FlowKind kind);
const char* to_string(Direction direction);
const char* to_string(Pacing pacing);
std::optional<FlowKind> flow_kind_from_string(const std::string& s);
std::optional<Direction> direction_from_string(const std::string& s);
std::optional<Pacing> pacing_from_string(const std::string& s);

struct Departure {
  std::int64_t time_ns = 0;
  std::uint16_t flow_id = 0;
  std::uint64_t seq = 0;
  std::uint32_t frame_id = 0;
  std::uint16_t fragment_index = 0;
  std::uint16_t fragment_count = 1;
  std::uint32_t payload_bytes = 0;

  [[nodiscard]] double time_s() const { return static_cast<double>(time_ns) * 1e-9; }
  bool operator==(const Departure&) const = default;
};

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
[[nodiscard]] double unit_uniform(std::mt19937_64& rng);
/// Inverse-CDF exponential sample with the given mean.
[[nodiscard]] double sample_exponential(std::mt19937_64& rng, double mean);

/// Merged departure schedule for one device. Infinite; call next() as long
/// as departures are wanted. Each flow advances on its own clock and
/// the earliest pending departure wins, ties going to the lower flow_id.
class Schedule {
 public:
  explicit Schedule(const DeviceTrafficProfile& profile, std::int64_t start_ns = 0);

  Departure next();
  [[nodiscard]] const Departure& peek() const;
  [[nodiscard]] bool empty() const { return flows_.empty(); }
  [[nodiscard]] std::size_t flow_count() const { return flows_.size(); }

 private:
  struct FlowState {
    FlowSpec spec;
    std::mt19937_64 rng;
    std::int64_t start_ns = 0;
    // Continuous clock in seconds relative to start_ns; converted to integer
    // nanoseconds on emission so that periodic flows do not drift.
    double clock_s = 0.0;
    std::uint64_t period_index = 0;
    std::uint64_t next_seq = 0;
    std::uint32_t frame_id = 0;
    std::uint16_t fragment_index = 0;
    std::uint16_t fragment_count = 1;
    std::uint64_t burst_index = 0;
    std::uint64_t in_burst = 0;
    std::uint64_t per_burst = 0;
    Departure pending;
  };

  struct HeapEntry {
    std::int64_t time_ns;
    std::uint16_t flow_id;
    std::size_t index;
    bool operator>(const HeapEntry& o) const {
      if (time_ns != o.time_ns) return time_ns > o.time_ns;
      return flow_id > o.flow_id;
    }
  };

  void prime(FlowState& flow);
  void advance(FlowState& flow);

  std::vector<FlowState> flows_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
};

}  // namespace sting
