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

#include "sting/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace sting {

void validate(const Scenario& s) {
  if (s.steps.empty()) throw SchemaError("scenario has no steps");
  if (!(s.window_s > 0.0)) throw SchemaError("window_s must be > 0");
  if (s.transport.kind != "emulated" && s.transport.kind != "udp")
    throw SchemaError("transport.kind must be 'emulated' or 'udp'");
  if (!(s.transport.channel.capacity_bps > 0.0)) throw SchemaError("channel capacity_bps must be > 0");
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& step = s.steps[i];
    const auto where = "step " + std::to_string(i) + ": ";
    if (!(step.duration_s > 0.0)) throw SchemaError(where + "duration_s must be > 0");
    if (step.repetitions < 1) throw SchemaError(where + "repetitions must be >= 1");
    std::set<std::string> seen;
    for (const auto& d : step.active_devices) {
      if (!seen.insert(d).second) throw SchemaError(where + "device listed twice: " + d);
      auto it = step.profiles.find(d);
      if (it == step.profiles.end()) throw SchemaError(where + "no profile for active device " + d);
      if (it->second.device_id != d) throw SchemaError(where + "profile device_id mismatch for " + d);
      try {
        validate(it->second);
      } catch (const InvalidProfile& e) {
        throw SchemaError(where + d + ": " + e.what());
      }
    }
  }
}

std::size_t interferer_count(const Scenario& scenario, const Step& step) {
  return static_cast<std::size_t>(std::count_if(step.active_devices.begin(), step.active_devices.end(), [&](auto& d) {
    return std::find(scenario.sut_devices.begin(), scenario.sut_devices.end(), d) == scenario.sut_devices.end();
  }));
}

std::vector<std::string> referenced_devices(const Scenario& scenario) {
  std::set<std::string> all;
  for (const auto& step : scenario.steps) all.insert(step.active_devices.begin(), step.active_devices.end());
  return {all.begin(), all.end()};
}

void to_json(Json& j, const Step& s) {
  Json profiles = Json::object();
  for (const auto& [id, p] : s.profiles) profiles[id] = p;
  j = Json{{"label", s.label},           {"active_devices", s.active_devices}, {"profiles", profiles},
           {"duration_s", s.duration_s}, {"repetitions", s.repetitions},       {"tracked", s.tracked}};
}

void from_json(const Json& j, Step& s) {
  s = Step{};
  s.label = j.value("label", std::string{});
  s.active_devices = j.value("active_devices", std::vector<std::string>{});
  if (auto it = j.find("profiles"); it != j.end())
    for (const auto& [id, p] : it->items()) s.profiles[id] = p.get<DeviceTrafficProfile>();
  s.duration_s = j.at("duration_s").get<double>();
  s.repetitions = j.value("repetitions", 1);
  s.tracked = j.value("tracked", true);
}

void to_json(Json& j, const TransportConfig& t) { j = Json{{"kind", t.kind}, {"channel", t.channel}}; }

void from_json(const Json& j, TransportConfig& t) {
  t = TransportConfig{};
  t.kind = j.value("kind", std::string("emulated"));
  if (auto it = j.find("channel"); it != j.end()) t.channel = it->get<ChannelConfig>();
}

void to_json(Json& j, const Scenario& s) {
  j = Json{{"schema_version", kSchemaVersion}, {"scenario_id", s.scenario_id}, {"steps", s.steps},
           {"sut_devices", s.sut_devices},     {"transport", s.transport},     {"window_s", s.window_s},
           {"metadata", s.metadata}};
}

void from_json(const Json& j, Scenario& s) {
  if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) throw SchemaError("unsupported schema_version");
  s = Scenario{};
  s.scenario_id = j.value("scenario_id", std::string{});
  s.steps = j.at("steps").get<std::vector<Step>>();
  s.sut_devices = j.value("sut_devices", std::vector<std::string>{});
  if (auto it = j.find("transport"); it != j.end()) s.transport = it->get<TransportConfig>();
  s.window_s = j.value("window_s", 1.0);
  s.metadata = j.value("metadata", Json::object());
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("scenario file is not valid JSON: " + path);
  auto s = parse_as<Scenario>(j, "scenario");
  validate(s);
  return s;
}

void to_json(Json& j, const DeviceFlowResult& r) {
  j = Json{{"device_id", r.device_id},
           {"flow_id", r.flow_id},
           {"direction", to_string(r.direction)},
           {"partial", r.partial},
           {"report", r.report}};
}

void from_json(const Json& j, DeviceFlowResult& r) {
  r.device_id = j.at("device_id").get<std::string>();
  r.flow_id = j.at("flow_id").get<std::uint16_t>();
  r.direction = direction_from_string(j.at("direction").get<std::string>()).value_or(Direction::Uplink);
  r.partial = j.value("partial", false);
  r.report = j.at("report").get<FlowReport>();
}

void to_json(Json& j, const StepExecution& e) {
  j = Json{{"index", e.index},
           {"step_index", e.step_index},
           {"repetition", e.repetition},
           {"label", e.label},
           {"tracked", e.tracked},
           {"active_devices", e.active_devices},
           {"interferer_count", e.interferer_count},
           {"start_ns", e.start_ns},
           {"stop_ns", e.stop_ns},
           {"offered_load_bps", e.offered_load_bps},
           {"status", e.status},
           {"config_hashes", e.config_hashes},
           {"results", e.results},
           {"completion_time_s", e.completion_time_s ? Json(*e.completion_time_s) : Json(nullptr)}};
}

void from_json(const Json& j, StepExecution& e) {
  e.index = j.at("index").get<int>();
  e.step_index = j.at("step_index").get<int>();
  e.repetition = j.at("repetition").get<int>();
  e.label = j.value("label", std::string{});
  e.tracked = j.value("tracked", true);
  e.active_devices = j.at("active_devices").get<std::vector<std::string>>();
  e.interferer_count = j.at("interferer_count").get<std::size_t>();
  e.start_ns = j.at("start_ns").get<std::int64_t>();
  e.stop_ns = j.at("stop_ns").get<std::int64_t>();
  e.offered_load_bps = j.at("offered_load_bps").get<double>();
  e.status = j.at("status").get<std::string>();
  e.config_hashes = j.value("config_hashes", std::map<std::string, std::string>{});
  e.results = j.at("results").get<std::vector<DeviceFlowResult>>();
  const auto& c = j.at("completion_time_s");
  e.completion_time_s = c.is_null() ? std::nullopt : std::optional<double>(c.get<double>());
}

void to_json(Json& j, const RunEvent& e) { j = Json{{"t_ns", e.t_ns}, {"kind", e.kind}, {"detail", e.detail}}; }

void from_json(const Json& j, RunEvent& e) {
  e.t_ns = j.at("t_ns").get<std::int64_t>();
  e.kind = j.at("kind").get<std::string>();
  e.detail = j.value("detail", Json::object());
}

void to_json(Json& j, const RunRecord& r) {
  j = Json{{"schema_version", kSchemaVersion}, {"run_id", r.run_id},
           {"scenario", r.scenario},           {"created_at_ns", r.created_at_ns},
           {"finished_at_ns", r.finished_at_ns}, {"status", r.status},
           {"executions", r.executions},       {"events", r.events}};
}

void from_json(const Json& j, RunRecord& r) {
  r.run_id = j.at("run_id").get<std::string>();
  r.scenario = j.at("scenario");
  r.created_at_ns = j.at("created_at_ns").get<std::int64_t>();
  r.finished_at_ns = j.value("finished_at_ns", std::int64_t{0});
  r.status = j.at("status").get<std::string>();
  r.executions = j.at("executions").get<std::vector<StepExecution>>();
  r.events = j.value("events", std::vector<RunEvent>{});
}

}  // namespace sting
