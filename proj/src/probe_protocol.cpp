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

#include "sting/probe_protocol.hpp"

#include <algorithm>

namespace sting {
namespace {

template <class T>
void put_be(std::uint8_t* p, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * (sizeof(T) - 1 - i)));
}

template <class T>
T get_be(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>((v << 8) | p[i]);
  return v;
}

}  // namespace

const char* to_string(ProbeErrc code) {
  switch (code) {
    case ProbeErrc::SizeTooSmall: return "SizeTooSmall";
    case ProbeErrc::BadMagic: return "BadMagic";
    case ProbeErrc::BadVersion: return "BadVersion";
    case ProbeErrc::BadType: return "BadType";
    case ProbeErrc::BadFragment: return "BadFragment";
    case ProbeErrc::Truncated: return "Truncated";
    case ProbeErrc::NotEchoRequest: return "NotEchoRequest";
  }
  return "?";
}

void encode_into(const ProbePacket& packet, std::span<std::uint8_t> out) {
  if (out.size() < kHeaderBytes) throw ProbeError(ProbeErrc::SizeTooSmall);
  if (packet.fragment_count == 0 || packet.fragment_index >= packet.fragment_count)
    throw ProbeError(ProbeErrc::BadFragment);
  std::uint8_t* p = out.data();
  std::copy(std::begin(kProbeMagic), std::end(kProbeMagic), p);
  p[4] = kProbeVersion;
  p[5] = static_cast<std::uint8_t>(packet.type);
  put_be<std::uint16_t>(p + 6, packet.flow_id);
  put_be<std::uint64_t>(p + 8, packet.seq);
  put_be<std::uint64_t>(p + 16, packet.tx_timestamp_ns);
  put_be<std::uint64_t>(p + 24, packet.responder_rx_ns);
  put_be<std::uint64_t>(p + 32, packet.responder_tx_ns);
  put_be<std::uint32_t>(p + 40, packet.frame_id);
  put_be<std::uint16_t>(p + 44, packet.fragment_index);
  put_be<std::uint16_t>(p + 46, packet.fragment_count);
  std::fill(out.begin() + kHeaderBytes, out.end(), std::uint8_t{0});
}

std::vector<std::uint8_t> encode(const ProbePacket& packet, std::size_t payload_bytes) {
  if (payload_bytes < kHeaderBytes) throw ProbeError(ProbeErrc::SizeTooSmall);
  std::vector<std::uint8_t> out(payload_bytes);
  encode_into(packet, out);
  return out;
}

ProbePacket decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw ProbeError(ProbeErrc::Truncated);
  const std::uint8_t* p = bytes.data();
  if (!std::equal(std::begin(kProbeMagic), std::end(kProbeMagic), p)) throw ProbeError(ProbeErrc::BadMagic);
  if (p[4] != kProbeVersion) throw ProbeError(ProbeErrc::BadVersion);
  if (p[5] > static_cast<std::uint8_t>(PacketType::EchoReply)) throw ProbeError(ProbeErrc::BadType);
  ProbePacket out;
  out.type = static_cast<PacketType>(p[5]);
  out.flow_id = get_be<std::uint16_t>(p + 6);
  out.seq = get_be<std::uint64_t>(p + 8);
  out.tx_timestamp_ns = get_be<std::uint64_t>(p + 16);
  out.responder_rx_ns = get_be<std::uint64_t>(p + 24);
  out.responder_tx_ns = get_be<std::uint64_t>(p + 32);
  out.frame_id = get_be<std::uint32_t>(p + 40);
  out.fragment_index = get_be<std::uint16_t>(p + 44);
  out.fragment_count = get_be<std::uint16_t>(p + 46);
  if (out.fragment_count == 0 || out.fragment_index >= out.fragment_count) throw ProbeError(ProbeErrc::BadFragment);
  return out;
}

ProbePacket make_echo_reply(const ProbePacket& request, std::uint64_t rx_ns, std::uint64_t tx_ns) {
  if (request.type != PacketType::EchoRequest) throw ProbeError(ProbeErrc::NotEchoRequest);
  ProbePacket reply = request;
  reply.type = PacketType::EchoReply;
  reply.responder_rx_ns = rx_ns;
  reply.responder_tx_ns = tx_ns;
  return reply;
}

std::int64_t round_trip_ns(const ProbePacket& reply, std::uint64_t rx_ns) {
  const auto total = static_cast<std::int64_t>(rx_ns - reply.tx_timestamp_ns);
  const auto dwell = static_cast<std::int64_t>(reply.responder_tx_ns - reply.responder_rx_ns);
  return total - dwell;
}

}  // namespace sting
