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

#include "sting/endpoint.hpp"

#include <algorithm>

#include "sting/probe_protocol.hpp"

namespace sting {
namespace {

std::string host_of(const std::string& addr) { return addr.substr(0, addr.rfind(':')); }
std::string port_of(const std::string& addr) {
  const auto c = addr.rfind(':');
  return c == std::string::npos ? std::string{} : addr.substr(c + 1);
}

// A peer advertised on the wildcard address matches any source host with
// the same port.
bool peer_matches(const std::string& peer, const std::string& src) {
  if (peer == src) return true;
  return host_of(peer) == "0.0.0.0" && port_of(peer) == port_of(src) && !port_of(src).empty();
}

template <class Map>
auto find_peer(Map& map, const std::string& src, std::uint16_t flow_id) {
  auto it = map.find({src, flow_id});
  if (it != map.end()) return it;
  for (it = map.begin(); it != map.end(); ++it)
    if (it->first.second == flow_id && peer_matches(it->first.first, src)) return it;
  return map.end();
}

}  // namespace

TrafficEndpoint::TrafficEndpoint(Runtime& runtime, Transport& transport) : runtime_(runtime), transport_(transport) {
  transport_.set_receive_handler([this](Datagram&& d) { on_receive(std::move(d)); });
}

TrafficEndpoint::~TrafficEndpoint() {
  transport_.set_receive_handler({});
  ++generation_;
  for (auto id : timers_) runtime_.cancel(id);
}

bool TrafficEndpoint::running() const {
  const auto now = runtime_.now_ns();
  return armed_ && now >= start_ns_ && now < stop_ns_;
}

void TrafficEndpoint::arm(std::vector<OutboundFlows> outbound, std::vector<InboundFlow> inbound, std::int64_t start_ns,
                          std::int64_t stop_ns, std::int64_t window_ns, FinishHandler on_finish) {
  if (armed_) throw std::logic_error("endpoint already armed");
  armed_ = true;
  ++generation_;
  start_ns_ = start_ns;
  stop_ns_ = stop_ns;
  on_finish_ = std::move(on_finish);
  senders_.clear();
  timers_.clear();
  outbound_metrics_.clear();
  inbound_metrics_.clear();
  inbound_specs_.clear();

  auto metrics_for = [&](const FlowSpec& spec) {
    MetricsConfig cfg;
    cfg.origin_ns = start_ns;
    cfg.window_ns = window_ns;
    cfg.frame_deadline_ns = static_cast<std::int64_t>(spec.frame_deadline_ms * 1e6);
    cfg.track_frames = spec.kind == FlowKind::FrameVideo;
    return FlowMetrics(spec.flow_id, cfg);
  };

  for (auto& out : outbound) {
    if (out.profile.flows.empty()) continue;
    Sender s{out.peer, Schedule(out.profile, start_ns), {}};
    for (const auto& f : out.profile.flows) {
      s.specs.emplace(f.flow_id, f);
      outbound_metrics_.emplace(Key{out.peer, f.flow_id}, metrics_for(f));
    }
    senders_.push_back(std::move(s));
  }
  for (auto& in : inbound) {
    Key key{in.peer, in.spec.flow_id};
    inbound_metrics_.emplace(key, metrics_for(in.spec));
    inbound_specs_.emplace(key, std::move(in));
  }

  for (std::size_t i = 0; i < senders_.size(); ++i) schedule_sender(i);
  const auto gen = generation_;
  timers_.push_back(runtime_.schedule_at(std::max(stop_ns, runtime_.now_ns()), [this, gen] {
    if (gen == generation_ && armed_) finish(false, {});
  }));
}

void TrafficEndpoint::schedule_sender(std::size_t index) {
  const auto t = senders_[index].schedule.peek().time_ns;
  if (t >= stop_ns_) return;
  const auto gen = generation_;
  runtime_.schedule_at(t, [this, gen, index] {
    if (gen == generation_ && armed_) fire_sender(index);
  });
}

void TrafficEndpoint::fire_sender(std::size_t index) {
  auto& sender = senders_[index];
  const Departure d = sender.schedule.next();
  const auto& spec = sender.specs.at(d.flow_id);
  ProbePacket p;
  p.type = spec.echo_every && d.seq % spec.echo_every == 0 ? PacketType::EchoRequest : PacketType::Data;
  p.flow_id = d.flow_id;
  p.seq = d.seq;
  p.tx_timestamp_ns = static_cast<std::uint64_t>(runtime_.now_ns());
  p.frame_id = d.frame_id;
  p.fragment_index = d.fragment_index;
  p.fragment_count = d.fragment_count;
  buffer_.resize(d.payload_bytes);
  encode_into(p, buffer_);
  try {
    transport_.send(sender.peer, buffer_);
  } catch (const TransportFailure& e) {
    finish(true, e.what());
    return;
  }
  ++counters_.sent;
  outbound_metrics_.at({sender.peer, d.flow_id}).record_sent(d.payload_bytes);
  schedule_sender(index);
}

void TrafficEndpoint::on_receive(Datagram&& d) {
  ProbePacket p;
  try {
    p = decode(d.bytes);
  } catch (const ProbeError&) {
    ++counters_.undecodable;
    return;
  }
  const auto tx = static_cast<std::int64_t>(p.tx_timestamp_ns);
  if (!running() || tx < start_ns_ || tx >= stop_ns_) {
    ++counters_.stale;
    return;
  }
  ++counters_.received;
  const auto wire = static_cast<std::uint32_t>(d.bytes.size());
  if (p.type == PacketType::EchoReply) {
    auto it = find_peer(outbound_metrics_, d.src, p.flow_id);
    if (it == outbound_metrics_.end()) {
      ++counters_.unexpected;
      return;
    }
    it->second.ingest(p, d.rx_ns, wire);
    return;
  }
  if (p.type == PacketType::EchoRequest) {
    const auto reply = make_echo_reply(p, static_cast<std::uint64_t>(d.rx_ns),
                                       static_cast<std::uint64_t>(runtime_.now_ns()));
    std::uint8_t bytes[kHeaderBytes];
    encode_into(reply, bytes);
    try {
      transport_.send(d.src, bytes);
      ++counters_.echoes_sent;
    } catch (const TransportFailure&) {
    }
  }
  auto it = find_peer(inbound_metrics_, d.src, p.flow_id);
  if (it == inbound_metrics_.end()) {
    ++counters_.unexpected;
    return;
  }
  it->second.ingest(p, d.rx_ns, wire);
}

void TrafficEndpoint::abort(const std::string& reason) {
  if (armed_) finish(true, reason);
}

void TrafficEndpoint::finish(bool partial, const std::string& failure) {
  ++generation_;
  for (auto id : timers_) runtime_.cancel(id);
  timers_.clear();
  armed_ = false;
  EndpointRun run;
  run.start_ns = start_ns_;
  run.stop_ns = stop_ns_;
  run.partial = partial;
  run.failure = failure;
  const auto end = partial ? std::min(runtime_.now_ns(), stop_ns_) : stop_ns_;
  for (const auto& [key, m] : outbound_metrics_)
    run.results.push_back({key.first, key.second, FlowRole::Sender, m.finalize(end)});
  for (const auto& [key, m] : inbound_metrics_)
    run.results.push_back({key.first, key.second, FlowRole::Receiver, m.finalize(end)});
  auto handler = std::move(on_finish_);
  on_finish_ = nullptr;
  if (handler) handler(std::move(run));
}

std::vector<std::pair<InboundFlow, FlowMetrics>> TrafficEndpoint::inbound_snapshot() const {
  std::vector<std::pair<InboundFlow, FlowMetrics>> out;
  for (const auto& [key, m] : inbound_metrics_) out.emplace_back(inbound_specs_.at(key), m);
  return out;
}

}  // namespace sting
