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

#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "sting/traffic_model.hpp"

using namespace sting;

namespace {

FlowSpec constant(std::uint16_t id, double rate, std::uint32_t payload, Pacing pacing = Pacing::Paced) {
  FlowSpec f;
  f.flow_id = id;
  f.kind = FlowKind::ConstantStream;
  f.target_rate_bps = rate;
  f.payload_bytes = payload;
  f.pacing = pacing;
  return f;
}

FlowSpec sensor(std::uint16_t id, IatModel iat, std::uint32_t payload = 100, std::uint64_t seed = 1) {
  FlowSpec f;
  f.flow_id = id;
  f.kind = FlowKind::PeriodicSensor;
  f.iat_model = iat;
  f.payload_bytes = payload;
  f.seed = seed;
  return f;
}

FlowSpec video(std::uint16_t id, double fps, std::uint32_t frame_bytes, std::uint32_t payload) {
  FlowSpec f;
  f.flow_id = id;
  f.kind = FlowKind::FrameVideo;
  f.frame_rate_hz = fps;
  f.frame_bytes = frame_bytes;
  f.payload_bytes = payload;
  return f;
}

DeviceTrafficProfile profile_of(std::vector<FlowSpec> flows) { return {"dev", std::move(flows)}; }

}  // namespace

TEST_CASE("constant stream spacing is payload bits over rate") {
  Schedule s(profile_of({constant(1, 300e6, 1500)}));
  std::int64_t prev = s.next().time_ns;
  CHECK(prev == 0);
  for (int i = 1; i <= 1000; ++i) {
    const auto d = s.next();
    CHECK(d.seq == static_cast<std::uint64_t>(i));
    // 1500 * 8 / 3e8 s = 40 us exactly
    CHECK(d.time_ns - prev == 40'000);
    prev = d.time_ns;
  }
}

TEST_CASE("deterministic sensor departs at 0, 1, 2 s") {
  Schedule s(profile_of({sensor(1, DeterministicIat{1.0})}));
  CHECK(s.next().time_s() == 0.0);
  CHECK(s.next().time_s() == 1.0);
  CHECK(s.next().time_s() == 2.0);
}

TEST_CASE("start offset shifts every departure") {
  Schedule s(profile_of({sensor(1, DeterministicIat{0.5})}), 7'000'000'000);
  CHECK(s.next().time_ns == 7'000'000'000);
  CHECK(s.next().time_ns == 7'500'000'000);
}

TEST_CASE("ties go to the lower flow id") {
  Schedule s(profile_of({sensor(7, DeterministicIat{1.0}), sensor(3, DeterministicIat{1.0})}));
  for (int t = 0; t < 3; ++t) {
    const auto a = s.next();
    const auto b = s.next();
    CHECK(a.time_ns == b.time_ns);
    CHECK(a.flow_id == 3);
    CHECK(b.flow_id == 7);
  }
}

TEST_CASE("exponential IAT sample mean within 2% for seed 42") {
  Schedule s(profile_of({sensor(1, ExponentialIat{0.010}, 100, 42)}));
  std::vector<double> iat;
  auto prev = s.next().time_ns;
  for (int i = 0; i < 100'000; ++i) {
    const auto t = s.next().time_ns;
    iat.push_back(static_cast<double>(t - prev) * 1e-9);
    prev = t;
  }
  const double mean = std::accumulate(iat.begin(), iat.end(), 0.0) / static_cast<double>(iat.size());
  CHECK(std::abs(mean - 0.010) / 0.010 < 0.02);
  CHECK(oracle::ks_p_value(oracle::ks_exponential(iat, 0.010), iat.size()) > 0.01);
}

TEST_CASE("offered load") {
  CHECK(offered_load(profile_of({constant(1, 300e6, 1500)})) == 3.0e8);
  CHECK(offered_load(profile_of({})) == 0.0);
  auto burst = sensor(1, OnOffIat{1.0, 1.0, 100e6}, 1250);
  burst.kind = FlowKind::BurstyTransfer;
  CHECK(offered_load(profile_of({burst})) == doctest::Approx(5.0e7));
  CHECK(offered_load(profile_of({video(1, 25, 25000, 1250)})) == doctest::Approx(5e6));
  CHECK(offered_load(profile_of({sensor(1, DeterministicIat{0.5}, 100)})) == doctest::Approx(1600.0));
}

TEST_CASE("on-off schedule matches duty-cycle load over a long horizon") {
  auto burst = sensor(1, OnOffIat{1.0, 1.0, 100e6}, 1250);
  burst.kind = FlowKind::BurstyTransfer;
  Schedule s(profile_of({burst}));
  const std::int64_t horizon = 200'000'000'000;  // 100 on/off cycles
  std::uint64_t packets = 0;
  std::int64_t last_in_on = 0;
  for (;;) {
    const auto d = s.next();
    if (d.time_ns >= horizon) break;
    ++packets;
    const auto phase = d.time_ns % 2'000'000'000;
    CHECK(phase < 1'000'000'000);
    last_in_on = std::max(last_in_on, phase);
  }
  const double rate = static_cast<double>(packets) * 1250 * 8 / 200.0;
  CHECK(std::abs(rate - 5e7) / 5e7 < 0.01);
  // back to back at 100 Mbit/s: 100 us spacing inside a burst
  CHECK(last_in_on > 999'000'000);
}

// Deterministic kinds hold 1% after 1000 mean IATs. Stochastic kinds have a
// count deviation of about 1/sqrt(N), so they get 2e5 IATs (sigma ~0.22%).
TEST_CASE("rate fidelity within 1% for every kind") {
  auto burst = sensor(4, OnOffIat{0.01, 0.03, 40e6}, 1000);
  burst.kind = FlowKind::BurstyTransfer;
  std::vector<FlowSpec> flows{constant(1, 10e6, 1250), constant(2, 7e6, 700, Pacing::Poisson),
                              sensor(3, ExponentialIat{0.002}, 200, 9), burst, video(5, 30, 10000, 1400)};
  for (const auto& f : flows) {
    CAPTURE(f.flow_id);
    Schedule s(profile_of({f}));
    std::uint64_t bits = 0;
    const double load = offered_load(f);
    const bool stochastic = f.pacing == Pacing::Poisson || std::holds_alternative<ExponentialIat>(f.iat_model);
    const double periods = stochastic && f.kind != FlowKind::FrameVideo ? 2e5 : 2000;
    const double mean_iat = f.kind == FlowKind::FrameVideo     ? 1.0 / f.frame_rate_hz
                            : f.kind == FlowKind::BurstyTransfer ? 0.04
                                                                  : f.payload_bytes * 8.0 / load;
    const auto horizon = static_cast<std::int64_t>(periods * mean_iat * 1e9);
    for (;;) {
      const auto d = s.next();
      if (d.time_ns >= horizon) break;
      bits += d.payload_bytes * 8ull;
    }
    const double rate = static_cast<double>(bits) / (static_cast<double>(horizon) * 1e-9);
    CHECK(std::abs(rate - load) / load < 0.01);
  }
}

TEST_CASE("merged schedule is monotone with per-flow sequences +1") {
  std::vector<FlowSpec> flows{constant(1, 3e6, 400, Pacing::Poisson), sensor(2, ExponentialIat{0.001}, 64, 5),
                              video(3, 60, 5000, 1000), constant(4, 1e6, 1000)};
  Schedule s(profile_of(flows));
  std::map<std::uint16_t, std::uint64_t> next_seq;
  std::int64_t prev = 0;
  for (int i = 0; i < 50'000; ++i) {
    const auto d = s.next();
    CHECK(d.time_ns >= prev);
    prev = d.time_ns;
    CHECK(d.seq == next_seq[d.flow_id]++);
  }
}

TEST_CASE("frame video emits fragment_count fragments per frame") {
  auto v = video(1, 25, 25000, 1250);
  CHECK(v.fragment_count() == 20);
  Schedule s(profile_of({v}));
  for (std::uint32_t frame = 0; frame < 50; ++frame) {
    std::int64_t t0 = -1;
    for (std::uint16_t k = 0; k < 20; ++k) {
      const auto d = s.next();
      CHECK(d.frame_id == frame);
      CHECK(d.fragment_index == k);
      CHECK(d.fragment_count == 20);
      CHECK(d.payload_bytes == 1250);
      if (t0 < 0) t0 = d.time_ns;
      CHECK(d.time_ns == t0);
    }
    CHECK(t0 == static_cast<std::int64_t>(frame) * 40'000'000);
  }
  // uneven split: last fragment carries the remainder
  Schedule odd(profile_of({video(1, 10, 2600, 1000)}));
  CHECK(odd.next().payload_bytes == 1000);
  CHECK(odd.next().payload_bytes == 1000);
  const auto last = odd.next();
  CHECK(last.payload_bytes == 600);
  CHECK(last.fragment_count == 3);
}

TEST_CASE("identical profiles and seeds give identical departures") {
  std::vector<FlowSpec> flows{constant(1, 3e6, 400, Pacing::Poisson), sensor(2, ExponentialIat{0.001}, 64, 77)};
  Schedule a(profile_of(flows)), b(profile_of(flows));
  for (int i = 0; i < 10'000; ++i) CHECK(a.next() == b.next());
  flows[1].seed = 78;
  Schedule c(profile_of(flows));
  Schedule e(profile_of({constant(1, 3e6, 400, Pacing::Poisson), sensor(2, ExponentialIat{0.001}, 64, 77)}));
  bool differs = false;
  for (int i = 0; i < 1000; ++i) differs |= !(c.next() == e.next());
  CHECK(differs);
}

TEST_CASE("validation") {
  auto ok = constant(1, 1e6, 48);
  CHECK_NOTHROW(validate(ok));
  auto small = constant(1, 1e6, 47);
  CHECK_THROWS_AS(validate(small), InvalidProfile);
  CHECK_THROWS_AS(validate(constant(1, 1e6, 65508)), InvalidProfile);
  CHECK_THROWS_AS(validate(constant(1, 0.0, 100)), InvalidProfile);
  CHECK_THROWS_AS(validate(sensor(1, DeterministicIat{0.0})), InvalidProfile);
  CHECK_THROWS_AS(validate(sensor(1, ExponentialIat{-1.0})), InvalidProfile);
  CHECK_THROWS_AS(validate(video(1, 25, 1000, 1250)), InvalidProfile);
  CHECK_THROWS_AS(validate(video(1, 0, 2500, 1250)), InvalidProfile);
  // last fragment of 1020 bytes in 1000-byte payloads would carry only 20 bytes
  CHECK_THROWS_AS(validate(video(1, 25, 1020, 1000)), InvalidProfile);
  CHECK_THROWS_AS(validate(profile_of({ok, ok})), InvalidProfile);
  CHECK_THROWS_AS(validate(DeviceTrafficProfile{"", {ok}}), InvalidProfile);
}

TEST_CASE("enum strings round trip") {
  for (auto k : {FlowKind::ConstantStream, FlowKind::PeriodicSensor, FlowKind::BurstyTransfer, FlowKind::FrameVideo})
    CHECK(flow_kind_from_string(to_string(k)) == k);
  for (auto d : {Direction::Uplink, Direction::Downlink}) CHECK(direction_from_string(to_string(d)) == d);
  for (auto p : {Pacing::Paced, Pacing::Poisson}) CHECK(pacing_from_string(to_string(p)) == p);
  CHECK_FALSE(flow_kind_from_string("tcp").has_value());
}

TEST_CASE("unit uniform stays in [0, 1)") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100'000; ++i) {
    const double u = unit_uniform(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
