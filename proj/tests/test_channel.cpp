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

#include <atomic>
#include <future>
#include <map>
#include <random>

#include "doctest.h"
#include "sting/channel.hpp"
#include "sting/probe_protocol.hpp"
#include "sting/runtime.hpp"
#include "sting/traffic_model.hpp"

using namespace sting;

namespace {

std::vector<std::uint8_t> bytes_of(std::size_t n, std::uint8_t tag = 0) { return std::vector<std::uint8_t>(n, tag); }

EmulatedChannel channel_with(ChannelConfig c, std::initializer_list<const char*> names) {
  EmulatedChannel ch(c);
  for (auto n : names) ch.attach(n);
  return ch;
}

}  // namespace

TEST_CASE("one 1250-byte packet at 100 Mbit/s takes 100 us") {
  auto ch = channel_with({}, {"a", "b"});
  const auto r = ch.transmit("a", "b", bytes_of(1250), 5'000);
  CHECK(r.accepted);
  CHECK(r.delivery_ns == 105'000);
  CHECK(ch.advance(104'999).empty());
  const auto out = ch.advance(105'000);
  REQUIRE(out.size() == 1);
  CHECK(out[0].src == "a");
  CHECK(out[0].dst == "b");
  CHECK(out[0].bytes.size() == 1250);
}

TEST_CASE("propagation delay is added after service") {
  ChannelConfig c;
  c.propagation_ns = 2'000'000;
  auto ch = channel_with(c, {"a", "b"});
  CHECK(ch.transmit("a", "b", bytes_of(1250), 0).delivery_ns == 2'100'000);
}

TEST_CASE("tail drop when the buffer is full") {
  ChannelConfig c;
  c.buffer_bytes = 3000;
  auto ch = channel_with(c, {"a", "b"});
  CHECK(ch.transmit("a", "b", bytes_of(1500), 0).accepted);
  CHECK(ch.transmit("a", "b", bytes_of(1500), 0).accepted);
  CHECK_FALSE(ch.transmit("a", "b", bytes_of(1), 0).accepted);
  CHECK(ch.dropped_packets() == 1);
  CHECK(ch.queue_bytes(0) == 3000);
  // after the first packet's service completes (120 us) there is room again
  CHECK(ch.transmit("a", "b", bytes_of(1500), 120'000).accepted);
  CHECK(ch.max_queue_bytes() <= c.buffer_bytes);
}

TEST_CASE("unknown endpoints are rejected") {
  auto ch = channel_with({}, {"a"});
  CHECK_THROWS_AS(ch.transmit("a", "zz", bytes_of(100), 0), UnknownEndpoint);
  CHECK_THROWS_AS(ch.transmit("zz", "a", bytes_of(100), 0), UnknownEndpoint);
  ch.detach("a");
  CHECK_THROWS_AS(ch.transmit("a", "a", bytes_of(100), 0), UnknownEndpoint);
}

TEST_CASE("advance with nothing pending is empty") {
  auto ch = channel_with({}, {"a"});
  CHECK(ch.advance(1'000'000'000).empty());
  CHECK_FALSE(ch.next_delivery_ns().has_value());
}

TEST_CASE("equal-time packets are served in call order, back to back") {
  auto ch = channel_with({}, {"a", "b", "c"});
  for (std::uint8_t i = 0; i < 10; ++i) ch.transmit(i % 2 ? "a" : "c", "b", bytes_of(1250, i), 0);
  const auto out = ch.advance(1'000'000'000);
  REQUIRE(out.size() == 10);
  for (std::uint8_t i = 0; i < 10; ++i) {
    CHECK(out[i].bytes[0] == i);
    // work conservation: the server never idles while packets wait
    CHECK(out[i].delivery_ns == 100'000 * (i + 1));
  }
}

TEST_CASE("random workloads: ordered deliveries, bounded queue, no loss below capacity") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    ChannelConfig c;
    c.capacity_bps = 1e6 * static_cast<double>(1 + rng() % 200);
    c.buffer_bytes = 2000 + rng() % 200'000;
    c.propagation_ns = static_cast<std::int64_t>(rng() % 1'000'000);
    auto ch = channel_with(c, {"a", "b"});
    std::int64_t now = 0;
    std::int64_t last = -1;
    for (int i = 0; i < 2000; ++i) {
      now += static_cast<std::int64_t>(rng() % 200'000);
      ch.transmit("a", "b", bytes_of(48 + rng() % 1452), now);
      CHECK(ch.queue_bytes(now) <= c.buffer_bytes);
      for (const auto& d : ch.advance(now)) {
        CHECK(d.delivery_ns >= last);
        last = d.delivery_ns;
      }
    }
  }
  // offered 50 Mbit/s into 100 Mbit/s with a 2-packet-deep buffer: no drops
  auto ch = channel_with({}, {"a", "b"});
  for (int i = 0; i < 10'000; ++i) CHECK(ch.transmit("a", "b", bytes_of(1250), i * 200'000).accepted);
  CHECK(ch.dropped_packets() == 0);
}

TEST_CASE("two 60 Mbit/s flows share 100 Mbit/s fairly") {
  auto ch = channel_with({}, {"a", "b", "sink"});
  auto flow = [](std::uint16_t id, std::uint64_t seed) {
    FlowSpec f;
    f.flow_id = id;
    f.target_rate_bps = 60e6;
    f.payload_bytes = 1250;
    f.pacing = Pacing::Poisson;
    f.seed = seed;
    return f;
  };
  Schedule sched(DeviceTrafficProfile{"x", {flow(1, 11), flow(2, 12)}});
  const std::int64_t horizon = 10'000'000'000;
  std::map<std::uint16_t, std::uint64_t> offered, delivered;
  std::vector<std::uint64_t> per_second(10, 0);
  for (;;) {
    const auto d = sched.next();
    if (d.time_ns >= horizon) break;
    ++offered[d.flow_id];
    auto payload = bytes_of(1250, static_cast<std::uint8_t>(d.flow_id));
    ch.transmit(d.flow_id == 1 ? "a" : "b", "sink", std::move(payload), d.time_ns);
    for (const auto& out : ch.advance(d.time_ns)) {
      ++delivered[out.bytes[0]];
      per_second[static_cast<std::size_t>(out.delivery_ns / 1'000'000'000)] += out.bytes.size();
    }
  }
  for (auto bytes : per_second) CHECK(bytes * 8.0 <= 100e6 * 1.0001);
  const double r1 = static_cast<double>(delivered[1]) / static_cast<double>(offered[1]);
  const double r2 = static_cast<double>(delivered[2]) / static_cast<double>(offered[2]);
  CHECK(std::abs(r1 - r2) / std::max(r1, r2) < 0.05);
  CHECK(ch.dropped_packets() > 0);
}

TEST_CASE("virtual runtime orders by time then insertion") {
  VirtualRuntime rt(100);
  std::vector<int> order;
  rt.schedule_at(300, [&] { order.push_back(3); });
  rt.schedule_at(200, [&] { order.push_back(1); });
  rt.schedule_at(200, [&] { order.push_back(2); });
  const auto cancelled = rt.schedule_at(250, [&] { order.push_back(99); });
  rt.cancel(cancelled);
  rt.schedule_at(50, [&] { order.push_back(0); });  // past: runs at now
  rt.run_until(1000);
  CHECK(order == std::vector<int>{0, 1, 2, 3});
  CHECK(rt.now_ns() == 1000);
  int fired = 0;
  rt.schedule_after(10, [&] { fired = static_cast<int>(rt.now_ns()); });
  CHECK(rt.run_while_not([&] { return fired != 0; }, 5000));
  CHECK(fired == 1010);
  CHECK_FALSE(rt.run_while_not([] { return false; }, 5000));
}

TEST_CASE("realtime runtime runs posted and timed tasks on its thread") {
  RealtimeRuntime rt;
  std::promise<bool> on_loop;
  rt.post([&] { on_loop.set_value(rt.on_loop_thread()); });
  CHECK(on_loop.get_future().get());
  std::promise<std::int64_t> fired;
  const auto due = rt.now_ns() + 20'000'000;
  rt.schedule_at(due, [&] { fired.set_value(rt.now_ns()); });
  CHECK(fired.get_future().get() >= due);
  std::atomic<bool> ran{false};
  const auto id = rt.schedule_at(rt.now_ns() + 30'000'000, [&] { ran = true; });
  rt.cancel(id);
  std::this_thread::sleep_for(std::chrono::milliseconds(60));
  CHECK_FALSE(ran);
  rt.stop();
}

TEST_CASE("emulated network delivers through the runtime and honours partitions") {
  VirtualRuntime rt;
  EmulatedNetwork net(rt, {});
  auto a = net.endpoint("a");
  auto b = net.endpoint("b");
  CHECK_THROWS(net.endpoint("a"));
  std::vector<Datagram> got;
  b->set_receive_handler([&](Datagram&& d) { got.push_back(std::move(d)); });
  std::vector<TraceEvent> trace;
  net.set_trace([&](const TraceEvent& e) { trace.push_back(e); });
  const auto msg = bytes_of(1250, 7);
  a->send("b", msg);
  rt.run_until(1'000'000);
  REQUIRE(got.size() == 1);
  CHECK(got[0].src == "a");
  CHECK(got[0].rx_ns == 100'000);
  CHECK(got[0].bytes == msg);
  net.set_partitioned("b", true);
  a->send("b", msg);
  rt.run_until(2'000'000);
  CHECK(got.size() == 1);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].accepted);
  CHECK_FALSE(trace[1].accepted);
  net.set_partitioned("b", false);
  a->send("b", msg);
  rt.run_until(3'000'000);
  CHECK(got.size() == 2);
  CHECK_THROWS_AS(a->send("nobody", msg), TransportFailure);
}
