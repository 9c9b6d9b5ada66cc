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

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "sting/channel.hpp"
#include "sting/metrics.hpp"
#include "sting/traffic_model.hpp"

namespace sting {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void to_json(Json& j, const FlowSpec& f);
void from_json(const Json& j, FlowSpec& f);
void to_json(Json& j, const DeviceTrafficProfile& p);
void from_json(const Json& j, DeviceTrafficProfile& p);
void to_json(Json& j, const WindowSample& w);
void from_json(const Json& j, WindowSample& w);
void to_json(Json& j, const RttSummary& r);
void from_json(const Json& j, RttSummary& r);
void to_json(Json& j, const FlowReport& r);
void from_json(const Json& j, FlowReport& r);
void to_json(Json& j, const ChannelConfig& c);
void from_json(const Json& j, ChannelConfig& c);

/// Parses with nlohmann's exceptions translated into SchemaError.
template <class T>
T parse_as(const Json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

/// Stable hex SHA-256 of the canonical (sorted-key, compact) dump.
std::string content_hash(const Json& j);
std::string sha256_hex(const std::string& data);

}  // namespace sting
