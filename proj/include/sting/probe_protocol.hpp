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
#include <span>
#include <stdexcept>
#include <vector>

namespace sting {

// Wire layout, all fields big-endian:
//
//   0  magic "STNG"        4  version (1)     5  type
//   6  flow_id u16         8  seq u64        16  tx_timestamp_ns u64
//  24  responder_rx_ns    32  responder_tx_ns
//  40  frame_id u32       44  fragment_index u16   46  fragment_count u16
//
// Bytes past the header up to the datagram size are zero padding.

inline constexpr std::uint8_t kProbeMagic[4] = {0x53, 0x54, 0x4E, 0x47};
inline constexpr std::uint8_t kProbeVersion = 1;
inline constexpr std::size_t kHeaderBytes = 48;

enum class PacketType : std::uint8_t { Data = 0, EchoRequest = 1, EchoReply = 2 };

struct ProbePacket {
  PacketType type = PacketType::Data;
  std::uint16_t flow_id = 0;
  std::uint64_t seq = 0;
  std::uint64_t tx_timestamp_ns = 0;
  std::uint64_t responder_rx_ns = 0;
  std::uint64_t responder_tx_ns = 0;
  std::uint32_t frame_id = 0;
  std::uint16_t fragment_index = 0;
  std::uint16_t fragment_count = 1;

  bool operator==(const ProbePacket&) const = default;
};

enum class ProbeErrc { SizeTooSmall, BadMagic, BadVersion, BadType, BadFragment, Truncated, NotEchoRequest };

const char* to_string(ProbeErrc code);

class ProbeError : public std::runtime_error {
 public:
  explicit ProbeError(ProbeErrc code) : std::runtime_error(to_string(code)), code_(code) {}
  [[nodiscard]] ProbeErrc code() const noexcept { return code_; }

 private:
  ProbeErrc code_;
};

std::vector<std::uint8_t> encode(const ProbePacket& packet, std::size_t payload_bytes = kHeaderBytes);
/// Writes the header into out[0..48) and zeroes the rest of out.
void encode_into(const ProbePacket& packet, std::span<std::uint8_t> out);
ProbePacket decode(std::span<const std::uint8_t> bytes);

ProbePacket make_echo_reply(const ProbePacket& request, std::uint64_t rx_ns, std::uint64_t tx_ns);

/// Round trip with the responder's dwell time removed.
[[nodiscard]] std::int64_t round_trip_ns(const ProbePacket& reply, std::uint64_t rx_ns);

}  // namespace sting
