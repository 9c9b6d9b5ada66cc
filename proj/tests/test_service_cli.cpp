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
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sting/cli.hpp"
#include "sting/scenario_library.hpp"
#include "sting/service.hpp"

using namespace sting;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("sting-svc-" + std::to_string(std::random_device{}()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
};

Scenario tiny(double duration_s = 1.0) {
  library::ContentionOptions o;
  o.capacity_bps = 10e6;
  o.sut_rate_bps = 1e6;
  o.interferer_rate_bps = 2e6;
  o.interferer_counts = {1};
  o.step_duration_s = duration_s;
  auto s = library::build_functional_test(o);
  s.scenario_id = "tiny";
  return s;
}

int http_status(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const HttpError& e) {
    return e.status();
  }
  return 200;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  int code;
  try {
    code = cli::run(cli::parse_args(args), out, err);
  } catch (const cli::UsageError&) {
    code = cli::kExitUsage;
  } catch (const std::exception&) {
    code = cli::kExitFailure;
  }
  if (out_text) *out_text = out.str();
  return code;
}

}  // namespace

TEST_CASE("HTTP API and live event stream on an emulated data plane") {
  TempDir dir;
  ServiceOptions o;
  o.http = {"127.0.0.1", 0};
  o.bus = {"127.0.0.1", 0};
  o.data_plane = "emulated";
  o.channel = ChannelConfig{10e6, 0, 62'500};
  o.emulated_devices = {"sut", "sting-1"};
  o.store_root = dir.path.string();
  ControllerService svc(o);
  svc.start();
  REQUIRE(svc.http_port() != 0);
  const auto base = "http://127.0.0.1:" + std::to_string(svc.http_port());

  // registration is asynchronous; heartbeats start immediately
  Json agents;
  for (int i = 0; i < 50; ++i) {
    agents = http_json("GET", base, "/agents");
    if (agents.size() == 2) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(agents.size() == 2);
  CHECK(agents[0]["reachable"] == true);

  CHECK(http_json("POST", base, "/scenarios", Json(tiny()))["scenario_id"] == "tiny");
  CHECK(http_json("GET", base, "/scenarios").size() == 1);
  CHECK(http_json("GET", base, "/scenarios/tiny").get<Scenario>() == tiny());
  CHECK(http_status([&] { http_json("GET", base, "/scenarios/nope"); }) == 404);

  auto udp = tiny();
  udp.transport.kind = "udp";
  CHECK(http_status([&] { http_json("POST", base, "/runs", Json{{"scenario", udp}}); }) == 400);
  CHECK(http_status([&] { http_json("POST", base, "/runs", Json{{"nothing", 1}}); }) == 400);

  const auto run_id = http_json("POST", base, "/runs", Json{{"scenario_id", "tiny"}})["run_id"].get<std::string>();
  CHECK(http_status([&] { http_json("POST", base, "/runs", Json{{"scenario_id", "tiny"}}); }) == 409);

  std::vector<std::string> kinds;
  std::size_t windows = 0;
  http_event_stream(base, "/runs/" + run_id + "/live", [&](const std::string& kind, const Json& data) {
    if (kind == "keepalive") return true;
    const auto k = data.value("kind", kind);
    if (k == "window") ++windows;
    kinds.push_back(k);
    return k != "run_finished";
  });
  REQUIRE_FALSE(kinds.empty());
  CHECK(kinds.front() == "run_started");
  CHECK(kinds.back() == "run_finished");
  CHECK(std::find(kinds.begin(), kinds.end(), "step_armed") != kinds.end());

  const auto rec = http_json("GET", base, "/runs/" + run_id).get<RunRecord>();
  CHECK(rec.status == "completed");
  REQUIRE(rec.executions.size() == 1);
  CHECK(rec.executions[0].results.size() == 3);
  CHECK(http_json("GET", base, "/runs").size() == 1);

  // a finished run replays its stored events then closes
  std::size_t replayed = 0;
  http_event_stream(base, "/runs/" + run_id + "/live", [&](const std::string&, const Json&) {
    ++replayed;
    return true;
  });
  CHECK(replayed >= kinds.size() - windows);

  const auto annotated = http_json("POST", base, "/runs/" + run_id + "/annotate",
                                   Json{{"execution", 0}, {"completion_time_s", 55.0}});
  CHECK(annotated["executions"][0]["completion_time_s"] == 55.0);
  CHECK(http_status([&] {
          http_json("POST", base, "/runs/" + run_id + "/annotate", Json{{"execution", 0}, {"completion_time_s", -3}});
        }) == 400);
  CHECK(http_status([&] { http_json("GET", base, "/runs/missing"); }) == 404);
  CHECK(http_status([&] { http_json("POST", base, "/runs/missing/abort"); }) == 404);

  // abort of an active run
  http_json("POST", base, "/scenarios", Json(tiny(30.0)));
  const auto long_id = http_json("POST", base, "/runs", Json{{"scenario", tiny(30.0)}})["run_id"].get<std::string>();
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(http_status([&] { http_json("POST", base, "/runs/" + long_id + "/abort"); }) == 200);
  std::string status;
  for (int i = 0; i < 100 && status != "aborted"; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    status = http_json("GET", base, "/runs/" + long_id)["status"].get<std::string>();
  }
  CHECK(status == "aborted");
  svc.stop();
}

TEST_CASE("command line parsing") {
  auto c = cli::parse_args({"sting-ctl", "serve", "--listen", "127.0.0.1:7000"});
  CHECK(c.subcommand == "serve");
  CHECK(c.listen == "127.0.0.1:7000");
  c = cli::parse_args({"sting-ctl", "--json", "runs", "export", "r1", "r2", "--out", "x", "--format", "csv"});
  CHECK(c.subcommand == "runs-export");
  CHECK(c.run_ids == std::vector<std::string>{"r1", "r2"});
  CHECK(c.json);
  c = cli::parse_args({"sting-ctl", "runs", "annotate", "r1", "3", "55.5"});
  CHECK(c.execution == 3);
  CHECK(c.completion_time_s == 55.5);
  c = cli::parse_args({"/usr/bin/sting-agent", "--id", "a1", "--controller", "10.0.0.1:7447"});
  CHECK(c.program == "sting-agent");
  CHECK(c.device_id == "a1");

  CHECK_THROWS_AS(cli::parse_args({"sting-ctl", "serve", "--bogus"}), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_args({"sting-ctl", "analyze"}), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_args({"sting-ctl", "demo", "--steps", "0"}), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_args({"sting-ctl"}), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_args({"sting-agent", "--id", "a1"}), cli::UsageError);
  try {
    cli::parse_args({"sting-ctl", "--help"});
    FAIL("expected help");
  } catch (const cli::UsageError& e) {
    CHECK(std::string(e.what()).empty());
    CHECK(e.usage().find("demo") != std::string::npos);
  }
}

TEST_CASE("demo, scenario run, runs and analyze against a store") {
  TempDir dir;
  const auto out = (dir.path / "demo").string();
  std::string text;
  CHECK(run_cli({"sting-ctl", "demo", "--steps", "5", "--step-duration", "10", "--out", out}, &text) == 0);
  CHECK(text.find("FAIL") == std::string::npos);
  for (const auto* f : {"run.json", "summary.csv", "contention.svg"}) CHECK(fs::exists(fs::path(out) / f));

  const auto store = (dir.path / "store").string();
  const auto file = dir.path / "tiny.json";
  std::ofstream(file) << Json(tiny(2.0)).dump(2);
  CHECK(run_cli({"sting-ctl", "--json", "--store", store, "scenario", "run", file.string()}, &text) == 0);
  const auto run_id = Json::parse(text)["run_id"].get<std::string>();

  CHECK(run_cli({"sting-ctl", "--json", "--store", store, "runs", "list"}, &text) == 0);
  CHECK(Json::parse(text).size() == 1);
  CHECK(run_cli({"sting-ctl", "--store", store, "runs", "annotate", run_id, "0", "55"}) == 0);
  CHECK(run_cli({"sting-ctl", "--store", store, "runs", "annotate", run_id, "9", "55"}) == 1);
  CHECK(run_cli({"sting-ctl", "--json", "--store", store, "runs", "show", run_id}, &text) == 0);
  CHECK(Json::parse(text)["executions"][0]["completion_time_s"] == 55.0);
  const auto exported = (dir.path / "export").string();
  CHECK(run_cli({"sting-ctl", "--store", store, "runs", "export", run_id, "--out", exported, "--format", "csv"}) == 0);
  CHECK(fs::exists(fs::path(exported) / "step_1_windows.csv"));
  CHECK(run_cli({"sting-ctl", "--json", "--store", store, "analyze", run_id}, &text) == 0);
  CHECK(Json::parse(text)["summaries"].size() == 1);
  CHECK(run_cli({"sting-ctl", "--store", store, "runs", "show", "missing"}) != 0);
}

TEST_CASE("contention checks flag a rising goodput") {
  std::vector<StepSummary> s(2);
  s[0].mean_throughput_bps = 5e6;
  s[1].mean_throughput_bps = 6e6;
  s[0].rtt = RttSummary{1, 1e6, 1e6, 1e6, 1e6};
  s[1].rtt = RttSummary{1, 2e6, 2e6, 2e6, 2e6};
  s[1].active_device_count = 2;
  bool goodput_failed = false;
  for (const auto& c : cli::check_contention_trend(s, 10e6, 100e6))
    if (c.name == "goodput non-increasing") goodput_failed = !c.passed;
  CHECK(goodput_failed);
}
