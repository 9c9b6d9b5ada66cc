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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "sting/probe_protocol.hpp"

using namespace sting;

namespace {

ProbePacket random_packet(std::mt19937_64& rng) {
  ProbePacket p;
  p.type = static_cast<PacketType>(rng() % 3);
  p.flow_id = static_cast<std::uint16_t>(rng());
  p.seq = rng();
  p.tx_timestamp_ns = rng();
  p.responder_rx_ns = rng();
  p.responder_tx_ns = rng();
  p.frame_id = static_cast<std::uint32_t>(rng());
  p.fragment_count = static_cast<std::uint16_t>(1 + rng() % 0xFFFF);
  p.fragment_index = static_cast<std::uint16_t>(rng() % p.fragment_count);
  return p;
}

ProbeErrc decode_error(std::span<const std::uint8_t> bytes) {
  try {
    decode(bytes);
  } catch (const ProbeError& e) {
    return e.code();
  }
  FAIL("decode accepted invalid input");
  return ProbeErrc::Truncated;
}

}  // namespace

TEST_CASE("zero data packet has the documented bytes") {
  ProbePacket p;
  p.flow_id = 1;
  const auto bytes = encode(p, 48);
  const std::vector<std::uint8_t> expected{
      0x53, 0x54, 0x4E, 0x47, 0x01, 0x00, 0x00, 0x01,  // magic, version, type, flow_id
      0, 0, 0, 0, 0, 0, 0, 0,                          // seq
      0, 0, 0, 0, 0, 0, 0, 0,                          // tx timestamp
      0, 0, 0, 0, 0, 0, 0, 0,                          // responder rx
      0, 0, 0, 0, 0, 0, 0, 0,                          // responder tx
      0, 0, 0, 0,                                      // frame_id
      0, 0, 0, 1};                                     // fragment index, count
  CHECK(bytes == expected);
}

TEST_CASE("golden header with every field set") {
  ProbePacket p;
  p.type = PacketType::EchoReply;
  p.flow_id = 0xBEEF;
  p.seq = 0x0102030405060708ull;
  p.tx_timestamp_ns = 0x1122334455667788ull;
  p.responder_rx_ns = 0x99AABBCCDDEEFF00ull;
  p.responder_tx_ns = 0x0F1E2D3C4B5A6978ull;
  p.frame_id = 0xCAFEBABE;
  p.fragment_index = 0x0002;
  p.fragment_count = 0x0010;
  const auto bytes = encode(p, 64);
  const std::vector<std::uint8_t> expected{
      0x53, 0x54, 0x4E, 0x47, 0x01, 0x02, 0xBE, 0xEF, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08,
      0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99, 0xAA, 0xBB, 0xCC, 0xDD, 0xEE, 0xFF, 0x00,
      0x0F, 0x1E, 0x2D, 0x3C, 0x4B, 0x5A, 0x69, 0x78, 0xCA, 0xFE, 0xBA, 0xBE, 0x00, 0x02, 0x00, 0x10,
      0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0,    0};
  CHECK(bytes == expected);
  CHECK(decode(bytes) == p);
}

TEST_CASE("fuzzed round trip") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10'000; ++i) {
    const auto p = random_packet(rng);
    const auto size = 48 + rng() % 1500;
    const auto bytes = encode(p, size);
    REQUIRE(bytes.size() == size);
    CHECK(decode(bytes) == p);
    CHECK(std::all_of(bytes.begin() + 48, bytes.end(), [](std::uint8_t b) { return b == 0; }));
  }
}

TEST_CASE("encode errors") {
  CHECK_THROWS_AS(encode(ProbePacket{}, 47), ProbeError);
  try {
    encode(ProbePacket{}, 47);
  } catch (const ProbeError& e) {
    CHECK(e.code() == ProbeErrc::SizeTooSmall);
  }
  ProbePacket bad;
  bad.fragment_count = 2;
  bad.fragment_index = 2;
  CHECK_THROWS_AS(encode(bad), ProbeError);
  std::vector<std::uint8_t> dirty(100, 0xFF);
  encode_into(ProbePacket{}, dirty);
  for (std::size_t k = 48; k < dirty.size(); ++k) CHECK(dirty[k] == 0);
}

TEST_CASE("decode errors") {
  auto bytes = encode(ProbePacket{}, 1500);
  auto magic = bytes;
  magic[0] = 0x54;
  CHECK(decode_error(magic) == ProbeErrc::BadMagic);
  auto version = bytes;
  version[4] = 2;
  CHECK(decode_error(version) == ProbeErrc::BadVersion);
  auto type = bytes;
  type[5] = 3;
  CHECK(decode_error(type) == ProbeErrc::BadType);
  auto frag = bytes;
  frag[47] = 0;
  CHECK(decode_error(frag) == ProbeErrc::BadFragment);
  CHECK(decode_error(std::span(bytes).first(20)) == ProbeErrc::Truncated);
  CHECK(decode_error(std::span(bytes).first(47)) == ProbeErrc::Truncated);
  CHECK_NOTHROW(decode(std::span(bytes).first(48)));
}

TEST_CASE("echo reply copies identity and sets responder times") {
  ProbePacket req;
  req.type = PacketType::EchoRequest;
  req.seq = 5;
  req.flow_id = 9;
  req.tx_timestamp_ns = 100;
  const auto reply = make_echo_reply(req, 150, 160);
  CHECK(reply.type == PacketType::EchoReply);
  CHECK(reply.seq == 5);
  CHECK(reply.flow_id == 9);
  CHECK(reply.tx_timestamp_ns == 100);
  CHECK(reply.responder_rx_ns == 150);
  CHECK(reply.responder_tx_ns == 160);
  CHECK(round_trip_ns(reply, 300) == 190);
  CHECK_THROWS_AS(make_echo_reply(ProbePacket{}, 1, 2), ProbeError);
}
