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

#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "sting/codec.hpp"
#include "sting/run_store.hpp"
#include "sting/scenario.hpp"
#include "sting/scenario_library.hpp"

using namespace sting;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sting-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

double rnd(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53) * 1e9; }

FlowReport random_report(std::mt19937_64& rng) {
  FlowReport r;
  r.flow_id = static_cast<std::uint16_t>(rng());
  r.origin_ns = static_cast<std::int64_t>(rng() >> 2);
  r.end_ns = r.origin_ns + static_cast<std::int64_t>(rng() % 100'000'000'000);
  r.window_ns = 1 + static_cast<std::int64_t>(rng() % 2'000'000'000);
  for (std::size_t i = 0, n = rng() % 8; i < n; ++i)
    r.windows.push_back({static_cast<std::int64_t>(rng() >> 1), rng() >> 8, rng() >> 8, rnd(rng), rng() % 100,
                         rnd(rng), rng() % 50});
  r.tx_packets = rng();
  r.tx_bytes = rng();
  r.rx_packets = rng();
  r.rx_bytes = rng();
  r.duplicate_count = rng() % 1000;
  if (rng() % 2) {
    r.max_seq = rng();
    r.loss_ratio = rnd(rng) / 1e9;
  }
  r.mean_throughput_bps = rnd(rng);
  if (rng() % 2) {
    r.rtt = RttSummary{rng() % 1000, rnd(rng), rnd(rng), rnd(rng), rnd(rng)};
    for (std::size_t i = 0, n = rng() % 20; i < n; ++i)
      r.rtt_samples_ns.push_back(static_cast<std::int64_t>(rng() >> 1) * (rng() % 2 ? 1 : -1));
  }
  r.jitter_ns = rnd(rng);
  r.frames_total = rng() % 10000;
  r.frames_dropped = rng() % 10000;
  return r;
}

RunRecord random_record(std::mt19937_64& rng, const std::string& id) {
  RunRecord r;
  r.run_id = id;
  r.scenario = library::build_parcours_test();
  r.created_at_ns = static_cast<std::int64_t>(rng() >> 1);
  r.finished_at_ns = r.created_at_ns + 1;
  r.status = rng() % 2 ? "completed" : "partial";
  for (int e = 0, n = static_cast<int>(rng() % 5); e < n; ++e) {
    StepExecution x;
    x.index = e;
    x.step_index = e / 2;
    x.repetition = e % 2;
    x.label = "step \"" + std::to_string(e) + "\"\n";
    x.tracked = rng() % 2;
    x.active_devices = {"sut", "sting-" + std::to_string(e)};
    x.interferer_count = rng() % 9;
    x.start_ns = static_cast<std::int64_t>(rng() >> 1);
    x.stop_ns = x.start_ns + 60'000'000'000;
    x.offered_load_bps = rnd(rng);
    x.status = "completed";
    x.config_hashes["sut"] = sha256_hex(std::to_string(rng()));
    for (int f = 0, m = static_cast<int>(rng() % 4); f < m; ++f)
      x.results.push_back({"dev-" + std::to_string(f), static_cast<std::uint16_t>(f),
                           rng() % 2 ? Direction::Uplink : Direction::Downlink, rng() % 2 == 0, random_report(rng)});
    if (rng() % 2) x.completion_time_s = rnd(rng) / 1e7;
    r.executions.push_back(std::move(x));
  }
  for (int e = 0, n = static_cast<int>(rng() % 6); e < n; ++e)
    r.events.push_back({static_cast<std::int64_t>(rng() >> 1), "ack", {{"device_id", "sut"}, {"n", e}}});
  return r;
}

}  // namespace

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(content_hash(Json{{"b", 1}, {"a", 2}}) == content_hash(Json{{"a", 2}, {"b", 1}}));
}

TEST_CASE("flow spec JSON round trip for every kind") {
  FlowSpec cs;
  cs.flow_id = 3;
  cs.target_rate_bps = 1e6;
  cs.pacing = Pacing::Poisson;
  cs.echo_every = 4;
  cs.seed = 0xFFFFFFFFFFFFFFFFull;
  FlowSpec sensor;
  sensor.kind = FlowKind::PeriodicSensor;
  sensor.iat_model = ExponentialIat{0.25};
  FlowSpec bursty;
  bursty.kind = FlowKind::BurstyTransfer;
  bursty.direction = Direction::Downlink;
  bursty.iat_model = OnOffIat{0.5, 1.5, 2e7};
  FlowSpec video;
  video.kind = FlowKind::FrameVideo;
  video.frame_rate_hz = 30;
  video.frame_bytes = 9000;
  video.frame_deadline_ms = 40;
  for (const auto& f : {cs, sensor, bursty, video}) {
    const Json j = f;
    CHECK(j.get<FlowSpec>() == f);
    CHECK(Json::parse(j.dump()).get<FlowSpec>() == f);
  }
  const Json j = cs;
  CHECK(j["kind"] == "constant_stream");
  CHECK(j["direction"] == "uplink");
}

TEST_CASE("schema errors are reported, not crashed on") {
  CHECK_THROWS_AS(parse_as<FlowSpec>(Json{{"kind", "warp_drive"}}, "flow"), SchemaError);
  CHECK_THROWS_AS(parse_as<FlowSpec>(Json::array(), "flow"), SchemaError);
  CHECK_THROWS_AS(parse_as<Scenario>(Json{{"steps", "nope"}}, "scenario"), SchemaError);
  CHECK_THROWS_AS(parse_as<FlowSpec>(Json{{"kind", "periodic_sensor"}, {"iat", {{"model", "weibull"}}}}, "flow"),
                  SchemaError);
}

TEST_CASE("scenario JSON round trip and validation") {
  const auto s = library::build_functional_test();
  const Json j = s;
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(Json::parse(j.dump()).get<Scenario>() == s);
  CHECK_NOTHROW(validate(s));
  auto bad = s;
  bad.steps[1].duration_s = 0;
  CHECK_THROWS_AS(validate(bad), SchemaError);
  bad = s;
  bad.steps[2].profiles.erase("sting-1");
  CHECK_THROWS_AS(validate(bad), SchemaError);
  bad = s;
  bad.steps[0].profiles["sut"].flows[0].payload_bytes = 40;
  CHECK_THROWS_AS(validate(bad), SchemaError);
  bad = s;
  bad.steps.clear();
  CHECK_THROWS_AS(validate(bad), SchemaError);
  bad = s;
  bad.steps[0].repetitions = 0;
  CHECK_THROWS_AS(validate(bad), SchemaError);
}

TEST_CASE("run record persist/load round trip on randomized records") {
  TempDir dir;
  RunStore store(dir.path);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    const auto r = random_record(rng, "run-" + std::to_string(i));
    const auto hash = store.persist(r);
    CHECK(hash == sha256_hex(Json(r).dump()));
    CHECK(fs::exists(dir.path / "runs" / (hash + ".json")));
    const auto back = store.load(r.run_id);
    CHECK(back == r);
    CHECK(Json(back).dump() == Json(r).dump());
    CHECK(store.load_raw(r.run_id) == Json(r).dump());
  }
}

TEST_CASE("listing follows created_at") {
  TempDir dir;
  RunStore store(dir.path);
  std::mt19937_64 rng(6);
  for (std::int64_t t : {30, 10, 20}) {
    auto r = random_record(rng, "run-at-" + std::to_string(t));
    r.created_at_ns = t;
    store.persist(r);
  }
  const auto list = store.list();
  REQUIRE(list.size() == 3);
  CHECK(list[0].run_id == "run-at-10");
  CHECK(list[1].run_id == "run-at-20");
  CHECK(list[2].run_id == "run-at-30");
  CHECK_THROWS_AS((void)store.load("missing"), NotFound);
  CHECK_FALSE(store.contains("missing"));
  // a second store on the same directory sees the same runs
  CHECK(RunStore(dir.path).list().size() == 3);
}

TEST_CASE("re-persisting a run replaces its index entry") {
  TempDir dir;
  RunStore store(dir.path);
  std::mt19937_64 rng(8);
  auto r = random_record(rng, "run-x");
  const auto h1 = store.persist(r);
  r.status = "aborted";
  const auto h2 = store.persist(r);
  CHECK(h1 != h2);
  CHECK(store.list().size() == 1);
  CHECK(store.load("run-x").status == "aborted");
}

TEST_CASE("concurrent persists are all retrievable") {
  TempDir dir;
  RunStore store(dir.path);
  std::vector<RunRecord> records;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 16; ++i) records.push_back(random_record(rng, "run-c" + std::to_string(i)));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (int i = t; i < 16; i += 4) store.persist(records[static_cast<std::size_t>(i)]);
    });
  for (auto& th : threads) th.join();
  CHECK(store.list().size() == 16);
  for (const auto& r : records) CHECK(store.load(r.run_id) == r);
}
