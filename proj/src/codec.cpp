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

#include "sting/codec.hpp"

#include <openssl/evp.h>

#include <cstdio>

namespace sting {
namespace {

template <class T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> get_optional(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(Json& j, const FlowSpec& f) {
  j = Json{{"flow_id", f.flow_id},
           {"kind", to_string(f.kind)},
           {"direction", to_string(f.direction)},
           {"target_rate_bps", f.target_rate_bps},
           {"payload_bytes", f.payload_bytes},
           {"pacing", to_string(f.pacing)},
           {"frame_rate_hz", f.frame_rate_hz},
           {"frame_bytes", f.frame_bytes},
           {"frame_deadline_ms", f.frame_deadline_ms},
           {"echo_every", f.echo_every},
           {"seed", f.seed}};
  Json iat;
  if (const auto* d = std::get_if<DeterministicIat>(&f.iat_model)) {
    iat = {{"model", "deterministic"}, {"period_s", d->period_s}};
  } else if (const auto* e = std::get_if<ExponentialIat>(&f.iat_model)) {
    iat = {{"model", "exponential"}, {"mean_s", e->mean_s}};
  } else {
    const auto& o = std::get<OnOffIat>(f.iat_model);
    iat = {{"model", "on_off"}, {"on_s", o.on_s}, {"off_s", o.off_s}, {"burst_rate_bps", o.burst_rate_bps}};
  }
  j["iat"] = iat;
}

void from_json(const Json& j, FlowSpec& f) {
  f = FlowSpec{};
  f.flow_id = j.at("flow_id").get<std::uint16_t>();
  const auto kind = flow_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw SchemaError("unknown flow kind " + j.at("kind").dump());
  f.kind = *kind;
  const auto dir = direction_from_string(j.value("direction", std::string("uplink")));
  if (!dir) throw SchemaError("unknown direction " + j.at("direction").dump());
  f.direction = *dir;
  f.target_rate_bps = j.value("target_rate_bps", 0.0);
  f.payload_bytes = j.value("payload_bytes", 1250u);
  const auto pacing = pacing_from_string(j.value("pacing", std::string("paced")));
  if (!pacing) throw SchemaError("unknown pacing " + j.at("pacing").dump());
  f.pacing = *pacing;
  f.frame_rate_hz = j.value("frame_rate_hz", 0.0);
  f.frame_bytes = j.value("frame_bytes", 0u);
  f.frame_deadline_ms = j.value("frame_deadline_ms", 100.0);
  f.echo_every = j.value("echo_every", 0u);
  f.seed = j.value("seed", std::uint64_t{1});
  if (auto it = j.find("iat"); it != j.end() && !it->is_null()) {
    const auto model = it->at("model").get<std::string>();
    if (model == "deterministic") {
      f.iat_model = DeterministicIat{it->at("period_s").get<double>()};
    } else if (model == "exponential") {
      f.iat_model = ExponentialIat{it->at("mean_s").get<double>()};
    } else if (model == "on_off") {
      f.iat_model = OnOffIat{it->at("on_s").get<double>(), it->at("off_s").get<double>(),
                             it->at("burst_rate_bps").get<double>()};
    } else {
      throw SchemaError("unknown iat model " + model);
    }
  }
}

void to_json(Json& j, const DeviceTrafficProfile& p) { j = Json{{"device_id", p.device_id}, {"flows", p.flows}}; }

void from_json(const Json& j, DeviceTrafficProfile& p) {
  p.device_id = j.at("device_id").get<std::string>();
  p.flows = j.value("flows", std::vector<FlowSpec>{});
}

void to_json(Json& j, const WindowSample& w) {
  j = Json{{"start_ns", w.start_ns},       {"rx_bytes", w.rx_bytes},       {"rx_packets", w.rx_packets},
           {"throughput_bps", w.throughput_bps}, {"rtt_count", w.rtt_count}, {"rtt_mean_ns", w.rtt_mean_ns},
           {"frames_dropped", w.frames_dropped}};
}

void from_json(const Json& j, WindowSample& w) {
  w.start_ns = j.at("start_ns").get<std::int64_t>();
  w.rx_bytes = j.at("rx_bytes").get<std::uint64_t>();
  w.rx_packets = j.at("rx_packets").get<std::uint64_t>();
  w.throughput_bps = j.at("throughput_bps").get<double>();
  w.rtt_count = j.value("rtt_count", std::uint64_t{0});
  w.rtt_mean_ns = j.value("rtt_mean_ns", 0.0);
  w.frames_dropped = j.value("frames_dropped", std::uint64_t{0});
}

void to_json(Json& j, const RttSummary& r) {
  j = Json{{"count", r.count}, {"mean_ns", r.mean_ns}, {"p50_ns", r.p50_ns}, {"p95_ns", r.p95_ns}, {"max_ns", r.max_ns}};
}

void from_json(const Json& j, RttSummary& r) {
  r.count = j.at("count").get<std::uint64_t>();
  r.mean_ns = j.at("mean_ns").get<double>();
  r.p50_ns = j.at("p50_ns").get<double>();
  r.p95_ns = j.at("p95_ns").get<double>();
  r.max_ns = j.at("max_ns").get<double>();
}

void to_json(Json& j, const FlowReport& r) {
  j = Json{{"flow_id", r.flow_id},
           {"origin_ns", r.origin_ns},
           {"end_ns", r.end_ns},
           {"window_ns", r.window_ns},
           {"windows", r.windows},
           {"tx_packets", r.tx_packets},
           {"tx_bytes", r.tx_bytes},
           {"rx_packets", r.rx_packets},
           {"rx_bytes", r.rx_bytes},
           {"duplicate_count", r.duplicate_count},
           {"mean_throughput_bps", r.mean_throughput_bps},
           {"rtt_samples_ns", r.rtt_samples_ns},
           {"jitter_ns", r.jitter_ns},
           {"frames_total", r.frames_total},
           {"frames_dropped", r.frames_dropped}};
  put_optional(j, "max_seq", r.max_seq);
  put_optional(j, "loss_ratio", r.loss_ratio);
  put_optional(j, "rtt", r.rtt);
}

void from_json(const Json& j, FlowReport& r) {
  r.flow_id = j.at("flow_id").get<std::uint16_t>();
  r.origin_ns = j.at("origin_ns").get<std::int64_t>();
  r.end_ns = j.at("end_ns").get<std::int64_t>();
  r.window_ns = j.at("window_ns").get<std::int64_t>();
  r.windows = j.at("windows").get<std::vector<WindowSample>>();
  r.tx_packets = j.value("tx_packets", std::uint64_t{0});
  r.tx_bytes = j.value("tx_bytes", std::uint64_t{0});
  r.rx_packets = j.at("rx_packets").get<std::uint64_t>();
  r.rx_bytes = j.at("rx_bytes").get<std::uint64_t>();
  r.duplicate_count = j.value("duplicate_count", std::uint64_t{0});
  r.mean_throughput_bps = j.at("mean_throughput_bps").get<double>();
  r.rtt_samples_ns = j.value("rtt_samples_ns", std::vector<std::int64_t>{});
  r.jitter_ns = j.value("jitter_ns", 0.0);
  r.frames_total = j.value("frames_total", std::uint64_t{0});
  r.frames_dropped = j.value("frames_dropped", std::uint64_t{0});
  r.max_seq = get_optional<std::uint64_t>(j, "max_seq");
  r.loss_ratio = get_optional<double>(j, "loss_ratio");
  r.rtt = get_optional<RttSummary>(j, "rtt");
}

void to_json(Json& j, const ChannelConfig& c) {
  j = Json{{"capacity_bps", c.capacity_bps}, {"propagation_ns", c.propagation_ns}, {"buffer_bytes", c.buffer_bytes}};
}

void from_json(const Json& j, ChannelConfig& c) {
  c = ChannelConfig{};
  c.capacity_bps = j.value("capacity_bps", c.capacity_bps);
  c.propagation_ns = j.value("propagation_ns", c.propagation_ns);
  c.buffer_bytes = j.value("buffer_bytes", c.buffer_bytes);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  out.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

std::string content_hash(const Json& j) { return sha256_hex(j.dump()); }

}  // namespace sting
