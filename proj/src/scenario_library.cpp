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

#include "sting/scenario_library.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sting::library {

namespace {

constexpr std::uint32_t kSutPayload = 1250;
constexpr std::uint32_t kInterfererPayload = 1500;
constexpr double kFrameRateHz = 25.0;
constexpr std::uint32_t kEchoEvery = 10;

Step make_step(const ContentionOptions& o, int interferers, const std::string& label) {
  Step step;
  step.label = label;
  step.duration_s = o.step_duration_s;
  step.active_devices.push_back(kSutDevice);
  step.profiles[kSutDevice] = sut_profile(o.sut_rate_bps, o.seed);
  for (int i = 1; i <= interferers; ++i) {
    const auto id = interferer_id(i);
    step.active_devices.push_back(id);
    step.profiles[id] = interferer_profile(id, o.interferer_rate_bps, o.seed * 1000 + static_cast<std::uint64_t>(i));
  }
  return step;
}

Scenario base(const ContentionOptions& o, const std::string& id) {
  Scenario s;
  s.scenario_id = id;
  s.sut_devices = {kSutDevice};
  s.transport.kind = "emulated";
  s.transport.channel.capacity_bps = o.capacity_bps;
  // 50 ms of queueing at the configured capacity.
  s.transport.channel.buffer_bytes = static_cast<std::uint64_t>(o.capacity_bps * 0.05 / 8.0);
  s.window_s = 1.0;
  return s;
}

}  // namespace

std::string interferer_id(int index) { return "sting-" + std::to_string(index); }

DeviceTrafficProfile sut_profile(double rate_bps, std::uint64_t seed) {
  DeviceTrafficProfile p;
  p.device_id = kSutDevice;

  FlowSpec video;
  video.flow_id = kVideoFlow;
  video.kind = FlowKind::FrameVideo;
  video.direction = Direction::Uplink;
  video.payload_bytes = kSutPayload;
  video.frame_rate_hz = kFrameRateHz;
  video.frame_bytes = static_cast<std::uint32_t>(std::llround(rate_bps / 2.0 / 8.0 / kFrameRateHz));
  video.frame_deadline_ms = 100.0;
  video.seed = seed;
  video.target_rate_bps = rate_bps / 2.0;

  FlowSpec control;
  control.flow_id = kControlFlow;
  control.kind = FlowKind::ConstantStream;
  control.direction = Direction::Uplink;
  control.payload_bytes = kSutPayload;
  control.target_rate_bps = rate_bps / 2.0;
  control.pacing = Pacing::Paced;
  control.echo_every = kEchoEvery;
  control.seed = seed + 1;

  p.flows = {video, control};
  return p;
}

DeviceTrafficProfile interferer_profile(const std::string& device_id, double rate_bps, std::uint64_t seed) {
  DeviceTrafficProfile p;
  p.device_id = device_id;
  FlowSpec f;
  f.flow_id = 1;
  f.kind = FlowKind::ConstantStream;
  f.direction = Direction::Uplink;
  f.payload_bytes = kInterfererPayload;
  f.target_rate_bps = rate_bps;
  f.pacing = Pacing::Poisson;
  f.seed = seed;
  p.flows = {f};
  return p;
}

Scenario build_functional_test(const ContentionOptions& o) {
  auto s = base(o, "functional-test");
  for (int n : o.interferer_counts) s.steps.push_back(make_step(o, n, std::to_string(n) + " active"));
  s.metadata = {{"kind", "functional"}};
  return s;
}

Scenario build_functional_test(double capacity_bps, double sut_rate_bps, double interferer_rate_bps) {
  ContentionOptions o;
  o.capacity_bps = capacity_bps;
  o.sut_rate_bps = sut_rate_bps;
  o.interferer_rate_bps = interferer_rate_bps;
  return build_functional_test(o);
}

ContentionOptions parcours_defaults() {
  ContentionOptions o;
  o.step_duration_s = 120.0;
  return o;
}

Scenario build_parcours_test(const ContentionOptions& o) {
  auto s = base(o, "parcours-test");
  auto intro = make_step(o, 0, "introductory run");
  intro.tracked = false;
  s.steps.push_back(std::move(intro));
  for (std::size_t i = 0; i < o.interferer_counts.size(); ++i) {
    const int n = o.interferer_counts[i];
    auto step = make_step(o, n, n == 0 ? "reference" : std::to_string(n) + " active");
    step.repetitions = 2;
    s.steps.push_back(std::move(step));
  }
  s.metadata = {{"kind", "parcours"}, {"operator", ""}};
  return s;
}

Json expected_manifest(const Scenario& scenario) {
  Json counts = Json::array(), tracked = Json::array();
  for (const auto& step : scenario.steps)
    for (int r = 0; r < step.repetitions; ++r) {
      counts.push_back(interferer_count(scenario, step));
      tracked.push_back(step.tracked);
    }
  std::size_t slots = 0;
  for (const auto& t : tracked) slots += t.get<bool>() ? 1 : 0;
  return Json{{"executions", counts.size()},
              {"interferer_counts", counts},
              {"tracked", tracked},
              {"annotation_slots", slots},
              {"monotonic", {{"sut_throughput", "non_increasing"}, {"rtt_mean", "non_decreasing"}}}};
}

std::vector<ReferenceScenario> reference_scenarios() {
  std::vector<ReferenceScenario> out;
  for (auto s : {build_functional_test(), build_parcours_test()}) {
    auto manifest = expected_manifest(s);
    out.push_back({s.scenario_id, std::move(s), std::move(manifest)});
  }
  return out;
}

EmulatedTestbed::EmulatedTestbed(const std::vector<std::string>& device_ids, ChannelConfig channel,
                                 TestbedOptions options)
    : runtime_(options.start_ns), bus_(runtime_), network_(runtime_, channel) {
  if (!options.store_root.empty()) store_ = std::make_unique<RunStore>(options.store_root);
  controller_transport_ = network_.endpoint("controller");
  controller_ = std::make_unique<Controller>(runtime_, bus_, *controller_transport_, store_.get(), options.controller);
  controller_->start();
  for (const auto& id : device_ids) {
    auto transport = network_.endpoint(id);
    AgentOptions ao;
    ao.device_id = id;
    ao.heartbeat_interval_ns = options.controller.heartbeat_interval_ns;
    ao.seed_override = options.seed_override;
    auto agent = std::make_unique<Agent>(runtime_, bus_, *transport, ao);
    agent->start();
    transports_[id] = std::move(transport);
    agents_[id] = std::move(agent);
  }
  settle();
}

EmulatedTestbed::EmulatedTestbed(const Scenario& scenario, TestbedOptions options)
    : EmulatedTestbed(referenced_devices(scenario), scenario.transport.channel, std::move(options)) {}

EmulatedTestbed::~EmulatedTestbed() {
  for (auto& [id, agent] : agents_) agent->stop();
  controller_->stop();
}

void EmulatedTestbed::settle() {
  const auto deadline = runtime_.now_ns() + 10'000'000'000;
  runtime_.run_while_not(
      [&] {
        for (const auto& [id, agent] : agents_)
          if (!controller_->agent(id)) return false;
        return true;
      },
      deadline);
}

RunRecord EmulatedTestbed::run(const Scenario& scenario) {
  settle();
  const auto run_id = controller_->start_run(scenario);
  runtime_.run_while_not([&] { return !controller_->run_active(); }, std::numeric_limits<std::int64_t>::max());
  auto record = controller_->find_run(run_id);
  if (!record) throw std::logic_error("run " + run_id + " did not finish");
  return *record;
}

Agent& EmulatedTestbed::agent(const std::string& device_id) {
  auto it = agents_.find(device_id);
  if (it == agents_.end()) throw std::out_of_range("no agent " + device_id);
  return *it->second;
}

}  // namespace sting::library
