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

#include "sting/channel.hpp"

#include <cmath>

namespace sting {

EmulatedChannel::EmulatedChannel(ChannelConfig config) : config_(config) {
  if (!(config_.capacity_bps > 0.0)) throw std::invalid_argument("capacity_bps must be > 0");
  if (config_.propagation_ns < 0) throw std::invalid_argument("propagation_ns must be >= 0");
}

void EmulatedChannel::attach(const std::string& endpoint) { endpoints_[endpoint] = true; }
void EmulatedChannel::detach(const std::string& endpoint) { endpoints_.erase(endpoint); }
bool EmulatedChannel::attached(const std::string& endpoint) const { return endpoints_.count(endpoint) != 0; }

void EmulatedChannel::drain_service(std::int64_t now_ns) {
  while (!in_service_.empty() && in_service_.front().completion_ns <= static_cast<double>(now_ns)) {
    queued_bytes_ -= in_service_.front().bytes;
    in_service_.pop_front();
  }
}

std::uint64_t EmulatedChannel::queue_bytes(std::int64_t now_ns) {
  drain_service(now_ns);
  return queued_bytes_;
}

TransmitResult EmulatedChannel::transmit(const std::string& src, const std::string& dst,
                                         std::vector<std::uint8_t> bytes, std::int64_t now_ns) {
  if (!attached(src)) throw UnknownEndpoint("unknown endpoint " + src);
  if (!attached(dst)) throw UnknownEndpoint("unknown endpoint " + dst);
  drain_service(now_ns);
  const std::uint64_t size = bytes.size();
  if (queued_bytes_ + size > config_.buffer_bytes) {
    ++dropped_packets_;
    return {false, 0};
  }
  const double start = std::max(static_cast<double>(now_ns), last_completion_ns_);
  const double completion = start + static_cast<double>(size) * 8.0 * 1e9 / config_.capacity_bps;
  last_completion_ns_ = completion;
  in_service_.push_back({completion, size});
  queued_bytes_ += size;
  max_queue_bytes_ = std::max(max_queue_bytes_, queued_bytes_);
  ++accepted_packets_;
  const std::int64_t delivery = std::llround(completion) + config_.propagation_ns;
  in_flight_.push_back({src, dst, std::move(bytes), delivery});
  return {true, delivery};
}

std::vector<Delivery> EmulatedChannel::advance(std::int64_t until_ns) {
  std::vector<Delivery> out;
  while (!in_flight_.empty() && in_flight_.front().delivery_ns <= until_ns) {
    out.push_back(std::move(in_flight_.front()));
    in_flight_.pop_front();
  }
  return out;
}

std::optional<std::int64_t> EmulatedChannel::next_delivery_ns() const {
  if (in_flight_.empty()) return std::nullopt;
  return in_flight_.front().delivery_ns;
}

class EmulatedNetwork::Endpoint final : public Transport {
 public:
  Endpoint(EmulatedNetwork& net, std::string name) : net_(net), name_(std::move(name)) {}
  ~Endpoint() override {
    net_.handlers_.erase(name_);
    net_.channel_.detach(name_);
  }
  void send(const std::string& dst, std::span<const std::uint8_t> bytes) override { net_.send(name_, dst, bytes); }
  void set_receive_handler(ReceiveHandler handler) override { net_.handlers_[name_] = std::move(handler); }
  [[nodiscard]] std::string local_address() const override { return name_; }

 private:
  EmulatedNetwork& net_;
  std::string name_;
};

EmulatedNetwork::EmulatedNetwork(Runtime& runtime, ChannelConfig config) : runtime_(runtime), channel_(config) {}
EmulatedNetwork::~EmulatedNetwork() = default;

std::unique_ptr<Transport> EmulatedNetwork::endpoint(const std::string& name) {
  if (channel_.attached(name)) throw std::invalid_argument("endpoint already attached: " + name);
  channel_.attach(name);
  return std::make_unique<Endpoint>(*this, name);
}

void EmulatedNetwork::set_partitioned(const std::string& name, bool partitioned) { partitioned_[name] = partitioned; }

void EmulatedNetwork::send(const std::string& src, const std::string& dst, std::span<const std::uint8_t> bytes) {
  const auto now = runtime_.now_ns();
  const auto blocked = [&](const std::string& n) {
    auto it = partitioned_.find(n);
    return it != partitioned_.end() && it->second;
  };
  if (!channel_.attached(dst)) throw TransportFailure("no such endpoint " + dst);
  TransmitResult result{};
  if (!blocked(src) && !blocked(dst))
    result = channel_.transmit(src, dst, std::vector<std::uint8_t>(bytes.begin(), bytes.end()), now);
  if (trace_) trace_({now, src, dst, bytes.size(), result.accepted});
  if (result.accepted) runtime_.schedule_at(result.delivery_ns, [this] { deliver(); });
}

void EmulatedNetwork::deliver() {
  for (auto& d : channel_.advance(runtime_.now_ns())) {
    auto it = handlers_.find(d.dst);
    if (it == handlers_.end() || !it->second) continue;
    it->second(Datagram{std::move(d.src), std::move(d.bytes), d.delivery_ns});
  }
}

}  // namespace sting
