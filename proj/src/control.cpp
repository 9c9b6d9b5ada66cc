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

#include "sting/control.hpp"

namespace sting {

const char* to_string(Lifecycle l) {
  switch (l) {
    case Lifecycle::Idle: return "idle";
    case Lifecycle::Configured: return "configured";
    case Lifecycle::Running: return "running";
    case Lifecycle::Reporting: return "reporting";
  }
  return "?";
}

std::optional<Lifecycle> lifecycle_from_string(const std::string& s) {
  for (auto l : {Lifecycle::Idle, Lifecycle::Configured, Lifecycle::Running, Lifecycle::Reporting})
    if (s == to_string(l)) return l;
  return std::nullopt;
}

namespace topics {
std::string config(const std::string& id) { return "sting/agents/" + id + "/config"; }
std::string command(const std::string& id) { return "sting/agents/" + id + "/command"; }
std::string status(const std::string& id) { return "sting/agents/" + id + "/status"; }
std::string results(const std::string& id) { return "sting/agents/" + id + "/results"; }
std::string events(const std::string& run_id) { return "sting/run/" + run_id + "/events"; }
}  // namespace topics

void to_json(Json& j, const StatusMessage& s) {
  j = Json{{"device_id", s.device_id},       {"lifecycle", to_string(s.lifecycle)},
           {"clock_ns", s.clock_ns},         {"active_flows", s.active_flows},
           {"data_address", s.data_address}, {"version", s.version}};
}

void from_json(const Json& j, StatusMessage& s) {
  s.device_id = j.at("device_id").get<std::string>();
  const auto l = lifecycle_from_string(j.at("lifecycle").get<std::string>());
  if (!l) throw SchemaError("unknown lifecycle " + j.at("lifecycle").dump());
  s.lifecycle = *l;
  s.clock_ns = j.value("clock_ns", std::int64_t{0});
  s.active_flows = j.value("active_flows", std::size_t{0});
  s.data_address = j.value("data_address", std::string{});
  s.version = j.value("version", std::string{});
}

Json envelope(const std::string& type, const std::string& msg_id, std::int64_t sent_ns) {
  return Json{{"schema_version", kSchemaVersion}, {"type", type}, {"msg_id", msg_id}, {"sent_ns", sent_ns}};
}

}  // namespace sting
