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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sting/agent.hpp"
#include "sting/bus.hpp"
#include "sting/channel.hpp"
#include "sting/controller.hpp"
#include "sting/runtime.hpp"
#include "sting/scenario.hpp"

namespace sting::library {

inline constexpr const char* kSutDevice = "sut";
inline constexpr std::uint16_t kVideoFlow = 1;
inline constexpr std::uint16_t kControlFlow = 2;

struct ContentionOptions {
  double capacity_bps = 100e6;
  double sut_rate_bps = 10e6;
  double interferer_rate_bps = 30e6;
  std::vector<int> interferer_counts{0, 2, 4, 6, 8};
  double step_duration_s = 60.0;
  std::uint64_t seed = 1;
};

/// Contention defaults with 120 s steps, room for a course run of up to ~100 s.
ContentionOptions parcours_defaults();

/// Interferer device ids: "sting-1" .. "sting-n".
std::string interferer_id(int index);

/// SUT profile: a FrameVideo uplink carrying half the rate and an echoed
/// ConstantStream carrying the other half.
DeviceTrafficProfile sut_profile(double rate_bps, std::uint64_t seed = 1);
DeviceTrafficProfile interferer_profile(const std::string& device_id, double rate_bps, std::uint64_t seed);

/// Stepped interference: one step per interferer count.
Scenario build_functional_test(const ContentionOptions& options = {});
Scenario build_functional_test(double capacity_bps, double sut_rate_bps, double interferer_rate_bps);

/// Introductory untracked run followed by two tracked repetitions per
/// interferer count; every tracked execution takes a completion time.
Scenario build_parcours_test(const ContentionOptions& options = parcours_defaults());

struct ReferenceScenario {
  std::string name;
  Scenario scenario;
  /// Expected structure: execution count, interferer counts per execution,
  /// tracked flags, monotonicity directions.
  Json manifest;
};

std::vector<ReferenceScenario> reference_scenarios();
Json expected_manifest(const Scenario& scenario);

struct TestbedOptions {
  ControllerOptions controller;
  std::optional<std::uint64_t> seed_override;
  /// Persist finished runs here when set.
  std::string store_root;
  std::int64_t start_ns = 0;
};

/// Controller, reflector, and one agent per device wired in-process over a
/// shared EmulatedChannel in virtual time.
class EmulatedTestbed {
 public:
  EmulatedTestbed(const std::vector<std::string>& device_ids, ChannelConfig channel, TestbedOptions options = {});
  explicit EmulatedTestbed(const Scenario& scenario, TestbedOptions options = {});
  ~EmulatedTestbed();
  EmulatedTestbed(const EmulatedTestbed&) = delete;
  EmulatedTestbed& operator=(const EmulatedTestbed&) = delete;

  /// Runs the scenario to completion in virtual time and returns its record.
  RunRecord run(const Scenario& scenario);
  /// Advances virtual time until every agent has registered.
  void settle();

  [[nodiscard]] VirtualRuntime& runtime() { return runtime_; }
  [[nodiscard]] Broker& bus() { return bus_; }
  [[nodiscard]] EmulatedNetwork& network() { return network_; }
  [[nodiscard]] Controller& controller() { return *controller_; }
  [[nodiscard]] Agent& agent(const std::string& device_id);
  [[nodiscard]] RunStore* store() { return store_.get(); }

 private:
  VirtualRuntime runtime_;
  Broker bus_;
  EmulatedNetwork network_;
  std::unique_ptr<RunStore> store_;
  std::unique_ptr<Transport> controller_transport_;
  std::unique_ptr<Controller> controller_;
  std::map<std::string, std::unique_ptr<Transport>> transports_;
  std::map<std::string, std::unique_ptr<Agent>> agents_;
};

}  // namespace sting::library
