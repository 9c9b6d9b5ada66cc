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

#include "sting/controller.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace sting {

struct Controller::ActiveRun {
  RunRecord record;
  Scenario scenario;
  std::vector<std::pair<int, int>> plan;  // (step index, repetition)
  std::size_t current = 0;
  enum class Phase { Configuring, Armed, Done } phase = Phase::Configuring;
  std::set<std::string> pending_acks;
  std::map<std::string, std::string> config_msgs;
  std::map<std::string, std::string> expected_hashes;
  std::set<std::pair<std::string, std::uint16_t>> expected_results;
  std::map<std::pair<std::string, std::uint16_t>, AgentResult> results;
  std::map<std::string, std::string> peer_to_device;
  std::optional<EndpointRun> reflector_run;
  std::int64_t earliest_start_ns = 0;
  bool aborted = false;
  bool partial = false;

  StepExecution& exec() { return record.executions[current]; }
  const Step& step() const { return scenario.steps[static_cast<std::size_t>(plan[current].first)]; }
};

Controller::Controller(Runtime& runtime, MessageBus& bus, Transport& data, RunStore* store, ControllerOptions options)
    : runtime_(runtime), bus_(bus), data_(data), store_(store), options_(options), reflector_(runtime, data) {}

Controller::~Controller() { stop(); }

void Controller::start() {
  subs_.push_back(bus_.subscribe(topics::kAllStatus, [this](const std::string&, const Json& m) { on_status(m); }));
  subs_.push_back(bus_.subscribe(topics::kAllResults, [this](const std::string&, const Json& m) { on_result(m); }));
  const auto gen = generation_;
  registry_timer_ = runtime_.schedule_after(options_.heartbeat_interval_ns, [this, gen] {
    if (gen == generation_) check_registry();
  });
}

void Controller::stop() {
  for (auto s : subs_) bus_.unsubscribe(s);
  subs_.clear();
  ++generation_;
  if (registry_timer_) runtime_.cancel(*registry_timer_);
  registry_timer_.reset();
}

void Controller::register_agent(const StatusMessage& status) {
  auto& e = registry_[status.device_id];
  const bool was_unreachable = !e.device_id.empty() && !e.reachable;
  e.device_id = status.device_id;
  e.data_address = status.data_address;
  e.lifecycle = status.lifecycle;
  e.last_seen_ns = runtime_.now_ns();
  e.reachable = true;
  if (was_unreachable && active_) log("agent_reachable", {{"device_id", status.device_id}});
}

std::vector<AgentEntry> Controller::agents() const {
  std::vector<AgentEntry> out;
  for (const auto& [id, e] : registry_) {
    out.push_back(e);
    out.back().reachable = reachable(id);
  }
  return out;
}

std::optional<AgentEntry> Controller::agent(const std::string& device_id) const {
  auto it = registry_.find(device_id);
  if (it == registry_.end()) return std::nullopt;
  auto e = it->second;
  e.reachable = reachable(device_id);
  return e;
}

bool Controller::reachable(const std::string& device_id) const {
  auto it = registry_.find(device_id);
  if (it == registry_.end()) return false;
  return runtime_.now_ns() - it->second.last_seen_ns <= options_.missed_heartbeats * options_.heartbeat_interval_ns;
}

void Controller::check_registry() {
  for (auto& [id, e] : registry_) {
    const bool now_reachable = reachable(id);
    if (e.reachable && !now_reachable && active_) log("agent_unreachable", {{"device_id", id}});
    e.reachable = now_reachable;
  }
  const auto gen = generation_;
  registry_timer_ = runtime_.schedule_after(options_.heartbeat_interval_ns, [this, gen] {
    if (gen == generation_) check_registry();
  });
}

void Controller::on_status(const Json& msg) {
  const auto type = msg.value("type", std::string{});
  if (type == "heartbeat") {
    try {
      register_agent(msg.at("status").get<StatusMessage>());
    } catch (const std::exception&) {
    }
    return;
  }
  if (type != "ack" || !active_ || active_->phase != ActiveRun::Phase::Configuring) return;
  const auto device = msg.value("device_id", std::string{});
  auto it = active_->config_msgs.find(device);
  if (it == active_->config_msgs.end() || it->second != msg.value("ref", std::string{})) return;
  if (!active_->pending_acks.count(device)) return;
  const bool ok = msg.value("ok", false);
  const auto hash = msg.value("config_hash", std::string{});
  if (!ok || hash != active_->expected_hashes[device]) {
    const auto reason = ok ? std::string("config hash mismatch") : msg.value("reason", std::string("nack"));
    log("nack", {{"device_id", device}, {"reason", reason}});
    active_->exec().status = "rejected";
    active_->partial = true;
    complete_execution(false);
    return;
  }
  active_->pending_acks.erase(device);
  active_->exec().config_hashes[device] = hash;
  log("ack", {{"device_id", device}, {"config_hash", hash}});
  if (active_->pending_acks.empty()) arm_execution();
}

std::string Controller::start_run(const Scenario& scenario) {
  if (active_) throw RunBusy("run " + active_->record.run_id + " is active");
  try {
    validate(scenario);
  } catch (const SchemaError& e) {
    throw ScenarioRejected(e.what());
  }
  for (const auto& d : referenced_devices(scenario)) {
    if (!registry_.count(d)) throw ScenarioRejected("unknown device " + d);
    if (!reachable(d)) throw ScenarioRejected("device unreachable: " + d);
  }

  auto run = std::make_unique<ActiveRun>();
  run->scenario = scenario;
  const auto now = runtime_.now_ns();
  std::ostringstream id;
  id << "run-" << now << "-" << ++run_counter_;
  run->record.run_id = id.str();
  run->record.scenario = scenario;
  run->record.created_at_ns = now;
  run->earliest_start_ns = now;
  int index = 0;
  for (std::size_t s = 0; s < scenario.steps.size(); ++s) {
    const auto& step = scenario.steps[s];
    for (int r = 0; r < step.repetitions; ++r) {
      run->plan.emplace_back(static_cast<int>(s), r);
      StepExecution e;
      e.index = index++;
      e.step_index = static_cast<int>(s);
      e.repetition = r;
      e.label = step.label;
      e.tracked = step.tracked;
      e.active_devices = step.active_devices;
      e.interferer_count = interferer_count(scenario, step);
      for (const auto& d : step.active_devices) e.offered_load_bps += offered_load(step.profiles.at(d));
      run->record.executions.push_back(std::move(e));
    }
  }
  active_ = std::move(run);
  log("run_started", {{"scenario_id", scenario.scenario_id}, {"executions", active_->plan.size()}});
  const auto run_id = active_->record.run_id;
  runtime_.post([this, run_id] {
    if (active_ && active_->record.run_id == run_id) begin_execution();
  });
  return run_id;
}

void Controller::begin_execution() {
  auto& run = *active_;
  if (run.aborted) return finish_run("aborted");
  if (run.current >= run.plan.size()) return finish_run(run.partial ? "partial" : "completed");
  ++generation_;
  run.phase = ActiveRun::Phase::Configuring;
  run.pending_acks.clear();
  run.config_msgs.clear();
  run.expected_hashes.clear();
  run.expected_results.clear();
  run.results.clear();
  run.peer_to_device.clear();
  run.reflector_run.reset();

  const auto& step = run.step();
  const auto window_ns = static_cast<std::int64_t>(std::llround(run.scenario.window_s * 1e9));
  for (const auto& d : step.active_devices) {
    const auto& profile = step.profiles.at(d);
    const auto msg_id = run.record.run_id + "/" + std::to_string(run.current) + "/config/" + d;
    Json msg = envelope("config", msg_id, runtime_.now_ns());
    msg["run_id"] = run.record.run_id;
    msg["step"] = run.current;
    msg["profile"] = profile;
    msg["reflector"] = data_.local_address();
    msg["window_ns"] = window_ns;
    run.pending_acks.insert(d);
    run.config_msgs[d] = msg_id;
    run.expected_hashes[d] = content_hash(Json(profile));
    for (const auto& f : profile.flows) run.expected_results.insert({d, f.flow_id});
    bus_.publish(topics::config(d), msg);
  }
  log("step_configuring", {{"execution", run.current}, {"label", step.label}, {"devices", step.active_devices}});
  if (run.pending_acks.empty()) return arm_execution();
  const auto gen = generation_;
  runtime_.schedule_after(options_.ack_timeout_ns, [this, gen] { on_ack_timeout(gen); });
}

void Controller::on_ack_timeout(std::uint64_t generation) {
  if (generation != generation_ || !active_ || active_->phase != ActiveRun::Phase::Configuring) return;
  auto& run = *active_;
  log("ack_timeout", {{"execution", run.current}, {"missing", std::vector<std::string>(run.pending_acks.begin(),
                                                                                          run.pending_acks.end())}});
  run.exec().status = "ack_timeout";
  run.partial = true;
  complete_execution(false);
}

void Controller::arm_execution() {
  auto& run = *active_;
  run.phase = ActiveRun::Phase::Armed;
  const auto& step = run.step();
  const auto start = std::max(runtime_.now_ns() + options_.arm_lead_ns, run.earliest_start_ns);
  const auto stop = start + static_cast<std::int64_t>(std::llround(step.duration_s * 1e9));
  auto& exec = run.exec();
  exec.start_ns = start;
  exec.stop_ns = stop;

  std::vector<OutboundFlows> outbound;
  std::vector<InboundFlow> inbound;
  for (const auto& d : step.active_devices) {
    const auto& profile = step.profiles.at(d);
    const auto peer = registry_.at(d).data_address;
    run.peer_to_device[peer] = d;
    OutboundFlows down{peer, {d, {}}};
    for (const auto& f : profile.flows) {
      if (f.direction == Direction::Uplink) {
        inbound.push_back({peer, f});
      } else {
        down.profile.flows.push_back(f);
      }
    }
    outbound.push_back(std::move(down));
  }
  const auto window_ns = static_cast<std::int64_t>(std::llround(run.scenario.window_s * 1e9));
  if (reflector_.armed()) reflector_.abort("superseded");
  reflector_.arm(std::move(outbound), std::move(inbound), start, stop, window_ns,
                 [this](EndpointRun&& r) { on_reflector_finished(std::move(r)); });

  for (const auto& d : step.active_devices) {
    Json cmd = envelope("command", run.record.run_id + "/" + std::to_string(run.current) + "/arm/" + d,
                        runtime_.now_ns());
    cmd["command"] = "arm";
    cmd["run_id"] = run.record.run_id;
    cmd["step"] = run.current;
    cmd["start_ns"] = start;
    cmd["stop_ns"] = stop;
    bus_.publish(topics::command(d), cmd);
  }
  log("step_armed", {{"execution", run.current},
                     {"start_ns", start},
                     {"stop_ns", stop},
                     {"interferers", exec.interferer_count},
                     {"offered_load_bps", exec.offered_load_bps}});
  const auto gen = generation_;
  runtime_.schedule_at(stop + options_.collect_timeout_ns, [this, gen] { on_collect_timeout(gen); });
  if (options_.live_interval_ns > 0)
    runtime_.schedule_at(start + options_.live_interval_ns, [this, gen] { live_tick(gen); });
}

void Controller::live_tick(std::uint64_t generation) {
  if (generation != generation_ || !active_ || active_->phase != ActiveRun::Phase::Armed) return;
  const auto now = runtime_.now_ns();
  auto& run = *active_;
  if (now > run.exec().stop_ns) return;
  Json flows = Json::array();
  for (auto& [in, metrics] : reflector_.inbound_snapshot()) {
    const auto report = metrics.finalize(now);
    const auto complete = static_cast<std::size_t>((now - report.origin_ns) / report.window_ns);
    if (complete == 0 || complete > report.windows.size()) continue;
    const auto& w = report.windows[complete - 1];
    auto dev = run.peer_to_device.find(in.peer);
    flows.push_back({{"device_id", dev == run.peer_to_device.end() ? in.peer : dev->second},
                     {"flow_id", in.spec.flow_id},
                     {"window_start_ns", w.start_ns},
                     {"throughput_bps", w.throughput_bps},
                     {"rx_packets", w.rx_packets}});
  }
  log("window", {{"execution", run.current}, {"flows", flows}}, false);
  const auto gen = generation_;
  runtime_.schedule_after(options_.live_interval_ns, [this, gen] { live_tick(gen); });
}

void Controller::on_result(const Json& msg) {
  if (msg.value("type", std::string{}) != "result" || !active_) return;
  AgentResult r;
  try {
    r = msg.at("result").get<AgentResult>();
  } catch (const std::exception&) {
    return;
  }
  auto& run = *active_;
  if (r.run_id != run.record.run_id || r.step != static_cast<int>(run.current) ||
      run.phase != ActiveRun::Phase::Armed)
    return;
  const std::pair key{r.device_id, r.flow_id};
  if (!run.expected_results.count(key)) return;
  if (run.results.count(key)) {
    log("result_duplicate", {{"device_id", r.device_id}, {"flow_id", r.flow_id}});
    return;
  }
  run.results.emplace(key, std::move(r));
  maybe_complete_execution();
}

void Controller::on_reflector_finished(EndpointRun&& r) {
  if (!active_ || active_->phase != ActiveRun::Phase::Armed) return;
  active_->reflector_run = std::move(r);
  maybe_complete_execution();
}

void Controller::maybe_complete_execution() {
  auto& run = *active_;
  if (run.reflector_run && run.results.size() == run.expected_results.size()) complete_execution(false);
}

void Controller::on_collect_timeout(std::uint64_t generation) {
  if (generation != generation_ || !active_ || active_->phase != ActiveRun::Phase::Armed) return;
  std::vector<std::string> missing;
  for (const auto& key : active_->expected_results)
    if (!active_->results.count(key)) missing.push_back(key.first + "/" + std::to_string(key.second));
  log("collect_timeout", {{"execution", active_->current}, {"missing", missing}});
  complete_execution(true);
}

void Controller::complete_execution(bool timed_out) {
  auto& run = *active_;
  auto& exec = run.exec();
  const bool configured = run.phase == ActiveRun::Phase::Armed;
  run.phase = ActiveRun::Phase::Done;
  ++generation_;

  if (!configured) {
    // Release agents that already accepted the config.
    for (const auto& d : run.step().active_devices) {
      Json cmd = envelope("command", run.record.run_id + "/" + std::to_string(run.current) + "/abort/" + d,
                          runtime_.now_ns());
      cmd["command"] = "abort";
      cmd["reason"] = exec.status;
      bus_.publish(topics::command(d), cmd);
    }
  } else {
    if (reflector_.armed()) reflector_.abort("collect timeout");
    std::map<std::pair<std::string, std::uint16_t>, const EndpointFlowResult*> reflector_side;
    if (run.reflector_run) {
      for (const auto& er : run.reflector_run->results) {
        auto dev = run.peer_to_device.find(er.peer);
        if (dev != run.peer_to_device.end()) reflector_side[{dev->second, er.flow_id}] = &er;
      }
    }
    bool partial = timed_out;
    for (const auto& d : run.step().active_devices) {
      for (const auto& f : run.step().profiles.at(d).flows) {
        DeviceFlowResult out;
        out.device_id = d;
        out.flow_id = f.flow_id;
        out.direction = f.direction;
        auto agent_it = run.results.find({d, f.flow_id});
        auto refl_it = reflector_side.find({d, f.flow_id});
        const FlowReport empty{};
        const FlowReport& agent_report = agent_it != run.results.end() ? agent_it->second.report : empty;
        const FlowReport& refl_report = refl_it != reflector_side.end() ? refl_it->second->report : empty;
        out.report = f.direction == Direction::Uplink ? merge_reports(refl_report, agent_report)
                                                      : merge_reports(agent_report, refl_report);
        out.partial = agent_it == run.results.end() || refl_it == reflector_side.end() ||
                      agent_it->second.partial || (run.reflector_run && run.reflector_run->partial);
        partial = partial || out.partial;
        exec.results.push_back(std::move(out));
      }
    }
    exec.status = run.aborted ? "aborted" : partial ? "partial" : "completed";
    if (partial) run.partial = true;
    run.earliest_start_ns = exec.stop_ns;
  }
  log("step_finished", {{"execution", run.current}, {"status", exec.status}});
  ++run.current;
  const auto run_id = run.record.run_id;
  runtime_.post([this, run_id] {
    if (active_ && active_->record.run_id == run_id) begin_execution();
  });
}

void Controller::abort_run(const std::string& run_id) {
  if (!active_ || active_->record.run_id != run_id) throw NotFound("no active run " + run_id);
  auto& run = *active_;
  if (run.aborted) return;
  run.aborted = true;
  log("abort_requested", {});
  if (run.phase == ActiveRun::Phase::Done) return;
  for (const auto& d : run.step().active_devices) {
    Json cmd = envelope("command", run.record.run_id + "/" + std::to_string(run.current) + "/abort/" + d,
                        runtime_.now_ns());
    cmd["command"] = "abort";
    cmd["reason"] = "run aborted";
    bus_.publish(topics::command(d), cmd);
  }
  if (run.phase == ActiveRun::Phase::Configuring) {
    run.exec().status = "aborted";
    complete_execution(false);
  } else {
    if (reflector_.armed()) reflector_.abort("run aborted");
    complete_execution(false);
  }
  for (std::size_t i = run.current; i < run.record.executions.size(); ++i) run.record.executions[i].status = "aborted";
}

void Controller::finish_run(const std::string& status) {
  auto run = std::move(active_);
  run->record.status = status;
  run->record.finished_at_ns = runtime_.now_ns();
  RunEvent ev{runtime_.now_ns(), "run_finished", {{"status", status}}};
  run->record.events.push_back(ev);
  bus_.publish(topics::events(run->record.run_id), Json(ev));
  persist(run->record);
  if (on_complete_) on_complete_(completed_.at(run->record.run_id));
}

void Controller::persist(const RunRecord& record) {
  completed_[record.run_id] = record;
  if (store_) store_->persist(record);
}

std::optional<std::string> Controller::active_run_id() const {
  if (!active_) return std::nullopt;
  return active_->record.run_id;
}

std::optional<RunRecord> Controller::find_run(const std::string& run_id) const {
  if (active_ && active_->record.run_id == run_id) return active_->record;
  if (auto it = completed_.find(run_id); it != completed_.end()) return it->second;
  if (store_ && store_->contains(run_id)) return store_->load(run_id);
  return std::nullopt;
}

std::vector<RunRecord> Controller::completed_runs() const {
  std::vector<RunRecord> out;
  for (const auto& [id, r] : completed_) out.push_back(r);
  return out;
}

RunRecord Controller::annotate_completion(const std::string& run_id, int execution_index, double completion_time_s) {
  if (!std::isfinite(completion_time_s) || completion_time_s < 0.0)
    throw InvalidAnnotation("completion time must be a non-negative number of seconds");
  RunRecord* record = nullptr;
  RunRecord loaded;
  if (active_ && active_->record.run_id == run_id) {
    record = &active_->record;
  } else if (auto it = completed_.find(run_id); it != completed_.end()) {
    record = &it->second;
  } else if (store_ && store_->contains(run_id)) {
    loaded = store_->load(run_id);
    record = &loaded;
  } else {
    throw NotFound("no run " + run_id);
  }
  if (execution_index < 0 || execution_index >= static_cast<int>(record->executions.size()))
    throw InvalidAnnotation("no execution " + std::to_string(execution_index) + " in run " + run_id);
  auto& exec = record->executions[static_cast<std::size_t>(execution_index)];
  if (!exec.tracked) throw InvalidAnnotation("execution " + std::to_string(execution_index) + " is untracked");
  exec.completion_time_s = completion_time_s;
  RunEvent ev{runtime_.now_ns(), "annotation", {{"execution", execution_index}, {"completion_time_s", completion_time_s}}};
  record->events.push_back(ev);
  bus_.publish(topics::events(run_id), Json(ev));
  if (!active_ || active_->record.run_id != run_id) persist(*record);
  return *record;
}

void Controller::log(const std::string& kind, Json detail, bool store) {
  if (!active_) return;
  RunEvent ev{runtime_.now_ns(), kind, std::move(detail)};
  bus_.publish(topics::events(active_->record.run_id), Json(ev));
  if (store) active_->record.events.push_back(std::move(ev));
}

}  // namespace sting
