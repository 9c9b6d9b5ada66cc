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
#include <string>

#include "sting/codec.hpp"

namespace sting {

enum class Lifecycle { Idle, Configured, Running, Reporting };

const char* to_string(Lifecycle l);
std::optional<Lifecycle> lifecycle_from_string(const std::string& s);

inline constexpr const char* kProtocolVersion = "sting/1";

namespace topics {
std::string config(const std::string& device_id);
std::string command(const std::string& device_id);
std::string status(const std::string& device_id);
std::string results(const std::string& device_id);
std::string events(const std::string& run_id);
inline constexpr const char* kAllStatus = "sting/agents/+/status";
inline constexpr const char* kAllResults = "sting/agents/+/results";
inline constexpr const char* kAllEvents = "sting/run/+/events";
}  // namespace topics

struct StatusMessage {
  std::string device_id;
  Lifecycle lifecycle = Lifecycle::Idle;
  std::int64_t clock_ns = 0;
  std::size_t active_flows = 0;
  std::string data_address;
  std::string version = kProtocolVersion;

  bool operator==(const StatusMessage&) const = default;
};

void to_json(Json& j, const StatusMessage& s);
void from_json(const Json& j, StatusMessage& s);

/// Common message envelope fields.
Json envelope(const std::string& type, const std::string& msg_id, std::int64_t sent_ns);

}  // namespace sting
