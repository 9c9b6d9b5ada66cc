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

#include "sting/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace sting {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw AnalysisError(AnalysisErrc::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<StepSummary> summarize(std::vector<RunRecord> records, const std::string& sut) {
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.created_at_ns != b.created_at_ns ? a.created_at_ns < b.created_at_ns : a.run_id < b.run_id;
  });

  struct Acc {
    StepSummary s;
    std::vector<double> rtt_samples;
    double expected = 0, lost = 0;
    double offered_sum = 0;
  };
  std::map<std::size_t, Acc> by_count;

  for (const auto& record : records) {
    for (const auto& exec : record.executions) {
      if (!exec.tracked || exec.results.empty()) continue;
      std::vector<const DeviceFlowResult*> flows;
      for (const auto& r : exec.results)
        if (r.device_id == sut) flows.push_back(&r);
      if (flows.empty()) continue;
      auto& acc = by_count[exec.interferer_count];
      acc.s.active_device_count = exec.interferer_count;
      ++acc.s.executions;
      acc.offered_sum += exec.offered_load_bps;

      std::size_t n = 0;
      for (const auto* f : flows) n = std::max(n, f->report.windows.size());
      acc.s.window_s = static_cast<double>(flows.front()->report.window_ns) * 1e-9;
      for (std::size_t i = 0; i < n; ++i) {
        double tput = 0, rtt_sum = 0;
        std::uint64_t rtt_n = 0, drops = 0;
        for (const auto* f : flows) {
          if (i >= f->report.windows.size()) continue;
          const auto& w = f->report.windows[i];
          tput += w.throughput_bps;
          rtt_sum += w.rtt_mean_ns * static_cast<double>(w.rtt_count);
          rtt_n += w.rtt_count;
          drops += w.frames_dropped;
        }
        acc.s.throughput_series_bps.push_back(tput);
        acc.s.rtt_series_ms.push_back(rtt_n ? rtt_sum / static_cast<double>(rtt_n) * 1e-6 : kNaN);
        acc.s.frame_drop_series.push_back(drops);
      }
      for (const auto* f : flows) {
        for (auto v : f->report.rtt_samples_ns) acc.rtt_samples.push_back(static_cast<double>(v));
        if (f->report.max_seq) {
          const double expected = static_cast<double>(*f->report.max_seq) + 1.0;
          acc.expected += expected;
          acc.lost += expected - static_cast<double>(f->report.rx_packets);
        }
        acc.s.frames_dropped += f->report.frames_dropped;
        acc.s.frames_total += f->report.frames_total;
      }
      if (exec.completion_time_s) acc.s.completion_times_s.push_back(*exec.completion_time_s);
    }
  }

  std::vector<StepSummary> out;
  for (auto& [count, acc] : by_count) {
    auto& s = acc.s;
    double sum = 0;
    for (auto v : s.throughput_series_bps) sum += v;
    s.mean_throughput_bps = s.throughput_series_bps.empty() ? 0.0 : sum / static_cast<double>(s.throughput_series_bps.size());
    s.offered_load_bps = s.executions ? acc.offered_sum / static_cast<double>(s.executions) : 0.0;
    if (!acc.rtt_samples.empty()) {
      std::vector<double> sorted = acc.rtt_samples;
      std::sort(sorted.begin(), sorted.end());
      double rsum = 0;
      for (auto v : sorted) rsum += v;
      RttSummary r;
      r.count = sorted.size();
      r.mean_ns = rsum / static_cast<double>(sorted.size());
      r.p50_ns = stats::percentile_sorted(sorted, 0.5);
      r.p95_ns = stats::percentile_sorted(sorted, 0.95);
      r.max_ns = sorted.back();
      s.rtt = r;
    }
    if (acc.expected > 0) s.loss_ratio = acc.lost / acc.expected;
    if (!s.completion_times_s.empty()) s.median_completion_s = stats::median(s.completion_times_s);
    out.push_back(std::move(s));
  }
  return out;
}

double median_increase(double reference_median, double loaded_median) {
  if (reference_median == 0.0)
    throw AnalysisError(AnalysisErrc::DivisionByZeroMedian, "reference median completion time is zero");
  return 100.0 * (loaded_median - reference_median) / reference_median;
}

double median_increase(const StepSummary& reference, const StepSummary& loaded) {
  if (!reference.median_completion_s || !loaded.median_completion_s)
    throw AnalysisError(AnalysisErrc::NoCompletionTimes, "step has no completion-time annotations");
  return median_increase(*reference.median_completion_s, *loaded.median_completion_s);
}

namespace {

void write_csvs(const std::vector<StepSummary>& summaries, const fs::path& dir, std::vector<fs::path>& written) {
  {
    const auto path = dir / "summary.csv";
    auto out = open_out(path);
    out << "active_devices,executions,windows,offered_load_bps,mean_throughput_bps,rtt_p50_ms,rtt_p95_ms,rtt_max_ms,"
           "rtt_mean_ms,loss_ratio,frames_dropped,frames_total,completion_count,median_completion_s\n";
    for (const auto& s : summaries) {
      const auto ms = [&](double RttSummary::*field) { return s.rtt ? num(s.rtt.value().*field * 1e-6) : ""; };
      out << s.active_device_count << ',' << s.executions << ',' << s.throughput_series_bps.size() << ','
          << num(s.offered_load_bps) << ',' << num(s.mean_throughput_bps) << ',' << ms(&RttSummary::p50_ns) << ','
          << ms(&RttSummary::p95_ns) << ',' << ms(&RttSummary::max_ns) << ',' << ms(&RttSummary::mean_ns) << ','
          << opt(s.loss_ratio) << ',' << s.frames_dropped << ',' << s.frames_total << ','
          << s.completion_times_s.size() << ',' << opt(s.median_completion_s) << '\n';
    }
    written.push_back(path);
  }
  {
    const auto path = dir / "completion_times.csv";
    auto out = open_out(path);
    out << "active_devices,sample_index,completion_s\n";
    for (const auto& s : summaries)
      for (std::size_t i = 0; i < s.completion_times_s.size(); ++i)
        out << s.active_device_count << ',' << i << ',' << num(s.completion_times_s[i]) << '\n';
    written.push_back(path);
  }
  for (const auto& s : summaries) {
    const auto path = dir / ("step_" + std::to_string(s.active_device_count) + "_windows.csv");
    auto out = open_out(path);
    out << "window_index,time_s,throughput_bps,rtt_mean_ms,frames_dropped\n";
    for (std::size_t i = 0; i < s.throughput_series_bps.size(); ++i)
      out << i << ',' << num(static_cast<double>(i) * s.window_s) << ',' << num(s.throughput_series_bps[i]) << ','
          << num(s.rtt_series_ms[i]) << ',' << s.frame_drop_series[i] << '\n';
    written.push_back(path);
  }
}

struct Panel {
  std::string title;
  std::string unit;
  std::vector<double> values;
};

void write_contention_svg(const std::vector<StepSummary>& summaries, const fs::path& path) {
  std::vector<Panel> panels{{"SUT throughput", "Mbit/s", {}}, {"Round trip time", "ms", {}}, {"Frame drops", "frames", {}}};
  std::vector<std::pair<std::size_t, std::size_t>> bands;  // [begin, end) per step
  for (const auto& s : summaries) {
    const auto begin = panels[0].values.size();
    for (std::size_t i = 0; i < s.throughput_series_bps.size(); ++i) {
      panels[0].values.push_back(s.throughput_series_bps[i] * 1e-6);
      panels[1].values.push_back(s.rtt_series_ms[i]);
      panels[2].values.push_back(static_cast<double>(s.frame_drop_series[i]));
    }
    bands.emplace_back(begin, panels[0].values.size());
  }
  const double width = 900, panel_h = 180, left = 70, right = 20, top = 30, gap = 40;
  const double plot_w = width - left - right;
  const double height = top + panels.size() * (panel_h + gap);
  const std::size_t n = std::max<std::size_t>(1, panels[0].values.size());
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double y0 = top + static_cast<double>(p) * (panel_h + gap);
    double vmax = 0;
    for (auto v : panels[p].values)
      if (!std::isnan(v)) vmax = std::max(vmax, v);
    if (vmax <= 0) vmax = 1;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const double x0 = left + plot_w * static_cast<double>(bands[b].first) / static_cast<double>(n);
      const double x1 = left + plot_w * static_cast<double>(bands[b].second) / static_cast<double>(n);
      out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << (x1 - x0) << "\" height=\"" << panel_h
          << "\" fill=\"" << (b % 2 ? "#eef2f7" : "#f9fafb") << "\"/>\n";
      if (p == 0)
        out << "<text x=\"" << (x0 + 4) << "\" y=\"" << (y0 - 4) << "\">" << summaries[b].active_device_count
            << " active</text>\n";
    }
    out << "<rect x=\"" << left << "\" y=\"" << y0 << "\" width=\"" << plot_w << "\" height=\"" << panel_h
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"8\" y=\"" << (y0 + 12) << "\">" << panels[p].title << "</text>\n";
    out << "<text x=\"8\" y=\"" << (y0 + 26) << "\">[" << panels[p].unit << "]</text>\n";
    out << "<text x=\"8\" y=\"" << (y0 + panel_h) << "\">0</text>\n";
    out << "<text x=\"8\" y=\"" << (y0 + 40) << "\">max " << num(std::round(vmax * 100) / 100) << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < panels[p].values.size(); ++i) {
      const double v = panels[p].values[i];
      if (std::isnan(v)) continue;
      const double x = left + plot_w * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double y = y0 + panel_h - panel_h * v / vmax;
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_completion_svg(const std::vector<StepSummary>& summaries, const fs::path& path) {
  const double width = 600, height = 320, left = 60, bottom = 40, top = 20;
  double vmax = 1;
  for (const auto& s : summaries)
    for (auto v : s.completion_times_s) vmax = std::max(vmax, v);
  vmax *= 1.1;
  const double plot_h = height - top - bottom;
  const double slot = (width - left - 20) / static_cast<double>(std::max<std::size_t>(1, summaries.size()));
  auto y = [&](double v) { return top + plot_h - plot_h * v / vmax; };
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"6\" y=\"14\">completion time [s]</text>\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    out << "<text x=\"" << (cx - 20) << "\" y=\"" << (height - 10) << "\">" << s.active_device_count
        << " active</text>\n";
    if (s.completion_times_s.empty()) continue;
    const auto b = stats::box(s.completion_times_s);
    const double w = slot * 0.4;
    out << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y(b.min) << "\" y2=\"" << y(b.max)
        << "\" stroke=\"#333\"/>\n";
    out << "<rect x=\"" << (cx - w / 2) << "\" y=\"" << y(b.p75) << "\" width=\"" << w << "\" height=\""
        << (y(b.p25) - y(b.p75)) << "\" fill=\"#cfe0f3\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << (cx - w / 2) << "\" x2=\"" << (cx + w / 2) << "\" y1=\"" << y(b.median) << "\" y2=\""
        << y(b.median) << "\" stroke=\"#b00\" stroke-width=\"2\"/>\n";
  }
  out << "</svg>\n";
}

void write_plots(const std::vector<StepSummary>& summaries, const fs::path& dir, std::vector<fs::path>& written) {
  write_contention_svg(summaries, dir / "contention.svg");
  written.push_back(dir / "contention.svg");
  write_completion_svg(summaries, dir / "completion.svg");
  written.push_back(dir / "completion.svg");
  const auto path = dir / "completion_box.csv";
  auto out = open_out(path);
  out << "active_devices,count,min_s,p25_s,median_s,p75_s,max_s\n";
  for (const auto& s : summaries) {
    if (s.completion_times_s.empty()) continue;
    const auto b = stats::box(s.completion_times_s);
    out << s.active_device_count << ',' << s.completion_times_s.size() << ',' << num(b.min) << ',' << num(b.p25)
        << ',' << num(b.median) << ',' << num(b.p75) << ',' << num(b.max) << '\n';
  }
  written.push_back(path);
}

}  // namespace

std::vector<fs::path> export_summaries(const std::vector<StepSummary>& summaries, const std::string& format,
                                       const fs::path& out_dir) {
  if (format != "csv" && format != "plot" && format != "all")
    throw AnalysisError(AnalysisErrc::UnknownFormat, "unknown export format '" + format + "'");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw AnalysisError(AnalysisErrc::Io, "cannot create " + out_dir.string());
  std::vector<fs::path> written;
  if (format == "csv" || format == "all") write_csvs(summaries, out_dir, written);
  if (format == "plot" || format == "all") write_plots(summaries, out_dir, written);
  return written;
}

Json summaries_to_json(const std::vector<StepSummary>& summaries, bool with_series) {
  Json out = Json::array();
  for (const auto& s : summaries) {
    Json j{{"active_devices", s.active_device_count},
           {"executions", s.executions},
           {"windows", s.throughput_series_bps.size()},
           {"offered_load_bps", s.offered_load_bps},
           {"mean_throughput_bps", s.mean_throughput_bps},
           {"rtt", s.rtt ? Json(*s.rtt) : Json()},
           {"loss_ratio", s.loss_ratio ? Json(*s.loss_ratio) : Json()},
           {"frames_dropped", s.frames_dropped},
           {"frames_total", s.frames_total},
           {"completion_times_s", s.completion_times_s},
           {"median_completion_s", s.median_completion_s ? Json(*s.median_completion_s) : Json()}};
    if (with_series) {
      j["window_s"] = s.window_s;
      j["throughput_series_bps"] = s.throughput_series_bps;
      Json rtt = Json::array();
      for (double v : s.rtt_series_ms) rtt.push_back(std::isnan(v) ? Json() : Json(v));
      j["rtt_series_ms"] = rtt;
      j["frame_drop_series"] = s.frame_drop_series;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw AnalysisError(AnalysisErrc::Io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sting
