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

#include "sting/agent.hpp"

#include <fstream>
#include <iostream>

namespace sting {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

const char* to_string(FlowRole r) { return r == FlowRole::Sender ? "sender" : "receiver"; }

}  // namespace

void to_json(Json& j, const AgentResult& r) {
  j = Json{{"run_id", r.run_id},
           {"step", r.step},
           {"device_id", r.device_id},
           {"flow_id", r.flow_id},
           {"direction", sting::to_string(r.direction)},
           {"role", to_string(r.role)},
           {"partial", r.partial},
           {"config_hash", r.config_hash},
           {"report", r.report}};
}

void from_json(const Json& j, AgentResult& r) {
  r.run_id = j.at("run_id").get<std::string>();
  r.step = j.at("step").get<int>();
  r.device_id = j.at("device_id").get<std::string>();
  r.flow_id = j.at("flow_id").get<std::uint16_t>();
  r.direction = direction_from_string(j.at("direction").get<std::string>()).value_or(Direction::Uplink);
  r.role = j.at("role").get<std::string>() == "receiver" ? FlowRole::Receiver : FlowRole::Sender;
  r.partial = j.value("partial", false);
  r.config_hash = j.value("config_hash", std::string{});
  r.report = j.at("report").get<FlowReport>();
}

std::uint64_t Agent::mix_seed(std::uint64_t base, const std::string& device_id, std::uint16_t flow_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : device_id) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(base ^ splitmix64(h) ^ (std::uint64_t{flow_id} << 32));
}

Agent::Agent(Runtime& runtime, MessageBus& bus, Transport& transport, AgentOptions options)
    : runtime_(runtime), bus_(bus), transport_(transport), options_(std::move(options)), endpoint_(runtime, transport) {
  if (options_.data_address.empty()) options_.data_address = transport_.local_address();
}

Agent::~Agent() { stop(); }

void Agent::start() {
  const auto id = options_.device_id;
  subs_.push_back(bus_.subscribe(topics::config(id), [this](const std::string&, const Json& m) { on_config(m); }));
  subs_.push_back(bus_.subscribe(topics::command(id), [this](const std::string&, const Json& m) { on_command(m); }));
  send_heartbeat();
}

void Agent::stop() {
  for (auto s : subs_) bus_.unsubscribe(s);
  subs_.clear();
  ++generation_;
  if (heartbeat_timer_) runtime_.cancel(*heartbeat_timer_);
  heartbeat_timer_.reset();
}

StatusMessage Agent::heartbeat() const {
  StatusMessage s;
  s.device_id = options_.device_id;
  s.lifecycle = lifecycle_;
  s.clock_ns = runtime_.now_ns();
  s.active_flows = lifecycle_ == Lifecycle::Idle || !profile_ ? 0 : profile_->flows.size();
  s.data_address = options_.data_address;
  return s;
}

void Agent::publish_status(Json payload) { bus_.publish(topics::status(options_.device_id), payload); }

void Agent::send_heartbeat() {
  Json msg = envelope("heartbeat", options_.device_id + "/hb/" + std::to_string(msg_counter_++), runtime_.now_ns());
  msg["status"] = heartbeat();
  publish_status(std::move(msg));
  const auto gen = generation_;
  heartbeat_timer_ = runtime_.schedule_after(options_.heartbeat_interval_ns, [this, gen] {
    if (gen == generation_) send_heartbeat();
  });
}

ApplyResult Agent::apply_config(const DeviceTrafficProfile& profile, const std::string& reflector,
                                std::int64_t window_ns) {
  if (armed_ || lifecycle_ == Lifecycle::Running || lifecycle_ == Lifecycle::Reporting)
    return {false, {}, "BusyRunning"};
  try {
    validate(profile);
    if (profile.device_id != options_.device_id) throw InvalidProfile("profile is for device " + profile.device_id);
    if (window_ns <= 0) throw InvalidProfile("window_ns must be > 0");
  } catch (const InvalidProfile& e) {
    return {false, {}, std::string("InvalidProfile: ") + e.what()};
  }
  profile_ = profile;
  config_hash_ = content_hash(Json(profile));
  if (options_.seed_override)
    for (auto& f : profile_->flows) f.seed = mix_seed(*options_.seed_override, options_.device_id, f.flow_id);
  reflector_ = reflector;
  window_ns_ = window_ns;
  lifecycle_ = Lifecycle::Configured;
  return {true, config_hash_, {}};
}

void Agent::run(std::int64_t start_ns, std::int64_t stop_ns, const std::string& run_id, int step) {
  if (lifecycle_ != Lifecycle::Configured || armed_ || !profile_) throw std::logic_error("agent is not configured");
  armed_ = true;
  run_id_ = run_id;
  step_ = step;

  DeviceTrafficProfile up{profile_->device_id, {}};
  std::vector<InboundFlow> inbound;
  for (const auto& f : profile_->flows) {
    if (f.direction == Direction::Uplink) {
      up.flows.push_back(f);
    } else {
      inbound.push_back({reflector_, f});
    }
  }
  const auto gen = generation_;
  runtime_.schedule_at(std::min(start_ns, stop_ns), [this, gen] {
    if (gen == generation_ && armed_) lifecycle_ = Lifecycle::Running;
  });
  endpoint_.arm({{reflector_, up}}, std::move(inbound), start_ns, stop_ns, window_ns_,
                [this](EndpointRun&& r) { on_finished(std::move(r)); });
}

void Agent::abort(const std::string& reason) {
  if (armed_) {
    endpoint_.abort(reason);
  } else if (lifecycle_ == Lifecycle::Configured) {
    lifecycle_ = Lifecycle::Idle;
    profile_.reset();
  }
}

void Agent::on_finished(EndpointRun&& run) {
  lifecycle_ = Lifecycle::Reporting;
  armed_ = false;
  last_results_.clear();
  for (const auto& f : profile_->flows) {
    const auto role = f.direction == Direction::Uplink ? FlowRole::Sender : FlowRole::Receiver;
    AgentResult r;
    r.run_id = run_id_;
    r.step = step_;
    r.device_id = options_.device_id;
    r.flow_id = f.flow_id;
    r.direction = f.direction;
    r.role = role;
    r.partial = run.partial;
    r.config_hash = config_hash_;
    for (auto& er : run.results)
      if (er.flow_id == f.flow_id && er.role == role) r.report = er.report;
    last_results_.push_back(std::move(r));
  }
  std::ofstream spool;
  if (!options_.spool_path.empty()) spool.open(options_.spool_path, std::ios::app);
  for (const auto& r : last_results_) {
    Json msg = envelope("result",
                        options_.device_id + "/" + run_id_ + "/" + std::to_string(step_) + "/" + std::to_string(r.flow_id),
                        runtime_.now_ns());
    msg["result"] = r;
    if (!run.failure.empty()) msg["failure"] = run.failure;
    if (spool) spool << msg.dump() << '\n';
    bus_.publish(topics::results(options_.device_id), msg);
  }
  ++runs_completed_;
  profile_.reset();
  lifecycle_ = Lifecycle::Idle;
}

void Agent::on_config(const Json& msg) {
  const auto msg_id = msg.value("msg_id", std::string{});
  Json ack = envelope("ack", options_.device_id + "/ack/" + std::to_string(msg_counter_++), runtime_.now_ns());
  ack["ref"] = msg_id;
  ack["device_id"] = options_.device_id;
  if (seen_msgs_.count(msg_id)) {
    // Redelivered config: acknowledge again without re-applying.
    ack["ok"] = lifecycle_ == Lifecycle::Configured;
    ack["config_hash"] = config_hash_;
    ack["duplicate"] = true;
    publish_status(std::move(ack));
    return;
  }
  seen_msgs_.insert(msg_id);
  ApplyResult result;
  try {
    const auto profile = parse_as<DeviceTrafficProfile>(msg.at("profile"), "profile");
    result = apply_config(profile, msg.value("reflector", std::string{}),
                          msg.value("window_ns", std::int64_t{1'000'000'000}));
  } catch (const std::exception& e) {
    result = {false, {}, std::string("InvalidProfile: ") + e.what()};
  }
  ack["ok"] = result.ok;
  ack["config_hash"] = result.config_hash;
  if (!result.ok) ack["reason"] = result.reason;
  publish_status(std::move(ack));
}

void Agent::on_command(const Json& msg) {
  const auto msg_id = msg.value("msg_id", std::string{});
  if (seen_msgs_.count(msg_id)) return;
  seen_msgs_.insert(msg_id);
  const auto command = msg.value("command", std::string{});
  try {
    if (command == "arm") {
      run(msg.at("start_ns").get<std::int64_t>(), msg.at("stop_ns").get<std::int64_t>(),
          msg.value("run_id", std::string{}), msg.value("step", 0));
    } else if (command == "abort") {
      abort(msg.value("reason", std::string("aborted by controller")));
    }
  } catch (const std::exception& e) {
    std::cerr << options_.device_id << ": rejected command " << command << ": " << e.what() << "\n";
  }
}

}  // namespace sting
