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

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/scenario.hpp"
#include "sting/stats.hpp"

namespace sting {

enum class AnalysisErrc { DivisionByZeroMedian, NoCompletionTimes, UnknownFormat, Io };

class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(AnalysisErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] AnalysisErrc code() const noexcept { return code_; }

 private:
  AnalysisErrc code_;
};

/// Pooled SUT measurements for one interferer count.
struct StepSummary {
  std::size_t active_device_count = 0;
  std::size_t executions = 0;
  double window_s = 1.0;
  /// SUT throughput per window, repetitions concatenated in run order.
  std::vector<double> throughput_series_bps;
  /// Mean RTT per window in ms; NaN where no echo reply arrived.
  std::vector<double> rtt_series_ms;
  std::vector<std::uint64_t> frame_drop_series;
  double mean_throughput_bps = 0.0;
  double offered_load_bps = 0.0;
  std::optional<RttSummary> rtt;
  std::optional<double> loss_ratio;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_total = 0;
  std::vector<double> completion_times_s;
  std::optional<double> median_completion_s;
};

/// One summary per interferer count, ascending. Only tracked executions
/// that produced results contribute. Independent of record order.
std::vector<StepSummary> summarize(std::vector<RunRecord> records, const std::string& sut_device_id);

/// Scalar fields per summary; the per-window series only when asked for.
Json summaries_to_json(const std::vector<StepSummary>& summaries, bool with_series = false);

/// Percent change of the median completion time.
double median_increase(const StepSummary& reference, const StepSummary& loaded);
double median_increase(double reference_median, double loaded_median);

/// Writes "csv", "plot", or "all" into out_dir; returns the files written.
std::vector<std::filesystem::path> export_summaries(const std::vector<StepSummary>& summaries,
                                                    const std::string& format, const std::filesystem::path& out_dir);

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

}  // namespace sting
