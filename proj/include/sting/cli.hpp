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
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/analysis.hpp"

namespace sting::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad command line. what() carries the message, usage() the help text.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, std::string usage) : std::runtime_error(what), usage_(std::move(usage)) {}
  [[nodiscard]] const std::string& usage() const { return usage_; }

 private:
  std::string usage_;
};

struct CliConfig {
  std::string program;     // sting-ctl | sting-agent
  std::string subcommand;  // serve, scenario-run, runs-list, runs-show, runs-export, runs-annotate, analyze, demo, agent
  std::string listen = "127.0.0.1:7000";
  std::string bus = "127.0.0.1:7447";
  std::string data = "0.0.0.0:7448";
  std::string data_plane = "udp";
  std::vector<std::string> emulated_devices;
  /// Agent: control-plane broker address. scenario run: controller HTTP URL.
  std::string controller;
  std::string transport = "udp";
  std::string bind = "0.0.0.0:0";
  std::string advertise;
  std::string device_id;
  std::string store = "sting-data";
  std::string out_dir;
  std::string format = "all";
  std::string sut = "sut";
  std::vector<std::string> run_ids;
  std::string scenario_file;
  int execution = -1;
  double completion_time_s = 0.0;
  int steps = 5;
  double step_duration_s = 60.0;
  std::uint64_t seed = 1;
  double heartbeat_s = 1.0;
  bool json = false;
  int verbosity = 0;
};

/// Throws UsageError on unknown flags, missing arguments, or bad values.
/// `--help` yields a UsageError whose message is empty.
CliConfig parse_args(const std::vector<std::string>& argv);
CliConfig parse_args(int argc, const char* const* argv);

/// Executes the parsed command; returns the process exit code.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Entry point shared by the tools: parse, run, map errors to exit codes.
int main_entry(int argc, const char* const* argv);

struct TrendCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Contention property checks over summaries ordered by interferer count.
/// The saturation checks apply only when the last step offers at least
/// 1.5x the channel capacity.
std::vector<TrendCheck> check_contention_trend(const std::vector<StepSummary>& summaries, double sut_offered_bps,
                                               double capacity_bps);

}  // namespace sting::cli
