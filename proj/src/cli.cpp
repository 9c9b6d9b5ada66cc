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

#include "sting/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sting/net.hpp"
#include "sting/run_store.hpp"
#include "sting/scenario_library.hpp"
#include "sting/service.hpp"

namespace sting::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

int log_level(const CliConfig& c) {
  int level = c.verbosity;
  if (const char* env = std::getenv("STING_LOG")) {
    const std::string v = env;
    if (v == "debug") level = std::max(level, 2);
    if (v == "info") level = std::max(level, 1);
    if (v == "quiet") level = -1;
  }
  return level;
}

std::optional<std::uint64_t> env_seed() {
  const char* env = std::getenv("STING_SEED");
  if (!env || !*env) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used, 0);
    if (used != std::strlen(env)) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("STING_SEED is not an integer: ") + env, "");
  }
}

std::string brief(const char* what) {
  std::string s = what;
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

CliConfig parse_agent(const std::vector<std::string>& argv) {
  CliConfig c;
  c.program = "sting-agent";
  c.subcommand = "agent";
  CLI::App app{"Traffic agent: generates and measures flows on command of a controller", "sting-agent"};
  app.add_option("--id", c.device_id, "Device id")->required();
  app.add_option("--controller", c.controller, "Controller control-plane address host:port")->required();
  app.add_option("--transport", c.transport, "Data plane transport")
      ->check(CLI::IsMember({"udp", "emulated"}));
  app.add_option("--bind", c.bind, "Local UDP address for the data plane");
  app.add_option("--advertise", c.advertise, "Data address reported to the controller");
  app.add_option("--heartbeat", c.heartbeat_s, "Heartbeat interval in seconds")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", c.verbosity, "More log output");
  app.add_flag("--json", c.json, "Machine-readable output");
  std::vector<std::string> args(argv.begin() + 1, argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw UsageError("", app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(brief(e.what()), app.help());
  }
  return c;
}

CliConfig parse_ctl(const std::vector<std::string>& argv) {
  CliConfig c;
  c.program = "sting-ctl";
  CLI::App app{"Controller, scenario runner, and analysis front end", "sting-ctl"};
  app.require_subcommand(1);
  app.add_flag("--json", c.json, "Machine-readable output on stdout");
  app.add_flag("-v,--verbose", c.verbosity, "More log output");
  app.add_option("--store", c.store, "Run store directory");

  auto* serve = app.add_subcommand("serve", "Run the controller");
  serve->add_option("--listen", c.listen, "HTTP API address");
  serve->add_option("--bus", c.bus, "Control-plane broker address");
  serve->add_option("--data", c.data, "Controller data endpoint (udp data plane)");
  serve->add_option("--data-plane", c.data_plane, "Data plane")->check(CLI::IsMember({"udp", "emulated"}));
  serve->add_option("--emulated-agents", c.emulated_devices, "In-process agents for the emulated data plane")
      ->delimiter(',');
  serve->add_option("--heartbeat", c.heartbeat_s, "Heartbeat interval in seconds")->check(CLI::PositiveNumber);

  auto* scenario = app.add_subcommand("scenario", "Scenario operations");
  scenario->require_subcommand(1);
  auto* scenario_run = scenario->add_subcommand("run", "Execute a scenario file");
  scenario_run->add_option("file", c.scenario_file, "Scenario JSON")->required()->check(CLI::ExistingFile);
  scenario_run->add_option("--controller", c.controller, "Controller HTTP URL; omit to run emulated in-process");
  scenario_run->add_option("--seed", c.seed, "Seed override for in-process runs");

  auto* runs = app.add_subcommand("runs", "Stored runs");
  runs->require_subcommand(1);
  runs->add_subcommand("list", "List runs");
  // single-id commands bind a scalar; a vector positional would swallow
  // the arguments that follow it
  std::string single_run;
  auto* show = runs->add_subcommand("show", "Print one run");
  show->add_option("run_id", single_run, "Run id")->required();
  auto* exp = runs->add_subcommand("export", "Export per-step CSV and plots");
  exp->add_option("run_id", c.run_ids, "Run ids")->required();
  exp->add_option("--out", c.out_dir, "Output directory")->required();
  exp->add_option("--format", c.format, "csv, plot, or all");
  exp->add_option("--sut", c.sut, "SUT device id");
  auto* annotate = runs->add_subcommand("annotate", "Record an operator completion time");
  annotate->add_option("run_id", single_run, "Run id")->required();
  annotate->add_option("execution", c.execution, "Execution index")->required();
  annotate->add_option("seconds", c.completion_time_s, "Completion time in seconds")->required();

  auto* analyze = app.add_subcommand("analyze", "Summarize runs per interferer count");
  analyze->add_option("run_id", c.run_ids, "Run ids")->required();
  analyze->add_option("--sut", c.sut, "SUT device id");
  analyze->add_option("--out", c.out_dir, "Write CSV and plots here");

  auto* demo = app.add_subcommand("demo", "Stepped-interference run on the emulated channel");
  demo->add_option("--steps", c.steps, "Number of steps (interferers 0, 2, 4, ...)")->check(CLI::Range(1, 32));
  demo->add_option("--step-duration", c.step_duration_s, "Seconds per step")->check(CLI::PositiveNumber);
  demo->add_option("--out", c.out_dir, "Output directory");
  demo->add_option("--seed", c.seed, "Base seed");

  std::vector<std::string> args(argv.begin() + 1, argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw UsageError("", app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(brief(e.what()), app.help());
  }
  if (!single_run.empty()) c.run_ids = {single_run};
  if (serve->parsed()) c.subcommand = "serve";
  if (scenario_run->parsed()) c.subcommand = "scenario-run";
  for (const char* name : {"list", "show", "export", "annotate"})
    if (runs->got_subcommand(name)) c.subcommand = std::string("runs-") + name;
  if (analyze->parsed()) c.subcommand = "analyze";
  if (demo->parsed()) c.subcommand = "demo";
  if (c.subcommand == "runs-export" && c.format != "csv" && c.format != "plot" && c.format != "all")
    throw UsageError("--format must be csv, plot, or all", exp->help());
  if (c.subcommand == "demo" && c.out_dir.empty()) c.out_dir = "sting-demo";
  return c;
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void print_summaries(const std::vector<StepSummary>& summaries, std::ostream& out) {
  out << std::left << std::setw(8) << "active" << std::setw(7) << "execs" << std::setw(14) << "goodput_Mbps"
      << std::setw(12) << "rtt_mean_ms" << std::setw(11) << "rtt_p95_ms" << std::setw(9) << "loss" << std::setw(14)
      << "frames_drop" << "median_s\n";
  for (const auto& s : summaries) {
    out << std::left << std::setw(8) << s.active_device_count << std::setw(7) << s.executions << std::setw(14)
        << fmt(s.mean_throughput_bps * 1e-6) << std::setw(12) << (s.rtt ? fmt(s.rtt->mean_ns * 1e-6) : "-")
        << std::setw(11) << (s.rtt ? fmt(s.rtt->p95_ns * 1e-6) : "-") << std::setw(9)
        << (s.loss_ratio ? fmt(*s.loss_ratio, 4) : "-") << std::setw(14)
        << (std::to_string(s.frames_dropped) + "/" + std::to_string(s.frames_total))
        << (s.median_completion_s ? fmt(*s.median_completion_s, 1) : "-") << "\n";
  }
}

void print_record(const RunRecord& r, std::ostream& out) {
  out << r.run_id << "  status " << r.status << "  executions " << r.executions.size() << "\n";
  for (const auto& e : r.executions) {
    double goodput = 0;
    for (const auto& f : e.results) goodput += f.report.mean_throughput_bps;
    out << "  [" << e.index << "] " << std::left << std::setw(18) << e.label << " interferers " << std::setw(3)
        << e.interferer_count << (e.tracked ? "tracked  " : "untracked") << " " << fmt(e.start_ns * 1e-9, 1) << "-"
        << fmt(e.stop_ns * 1e-9, 1) << "s  " << std::setw(12) << e.status << " results " << e.results.size();
    if (e.completion_time_s) out << "  completion " << fmt(*e.completion_time_s, 1) << "s";
    out << "\n";
  }
}

std::vector<RunRecord> load_runs(const CliConfig& c) {
  RunStore store(c.store);
  std::vector<RunRecord> records;
  for (const auto& id : c.run_ids) records.push_back(store.load(id));
  return records;
}

int run_serve(const CliConfig& c, std::ostream& out) {
  ServiceOptions o;
  o.http = net::parse_host_port(c.listen);
  o.bus = net::parse_host_port(c.bus);
  o.data = net::parse_host_port(c.data);
  o.data_plane = c.data_plane;
  o.emulated_devices = c.emulated_devices;
  o.store_root = c.store;
  o.controller.heartbeat_interval_ns = static_cast<std::int64_t>(c.heartbeat_s * 1e9);
  if (!o.emulated_devices.empty() && o.data_plane != "emulated")
    throw UsageError("--emulated-agents needs --data-plane emulated", "");
  ControllerService svc(o);
  svc.start();
  const auto http = "http://" + o.http.host + ":" + std::to_string(svc.http_port());
  const auto bus = o.bus.host + ":" + std::to_string(svc.bus_port());
  if (c.json)
    out << Json{{"http", http}, {"bus", bus}, {"data", svc.data_address()}}.dump() << std::endl;
  else
    out << "sting-ctl serving " << http << "  bus " << bus << "  data " << svc.data_address() << std::endl;
  install_signal_handlers();
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  svc.stop();
  return kExitOk;
}

int run_agent(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.transport == "emulated") {
    err << "sting-agent: the emulated transport exists only inside a controller process; use "
           "`sting-ctl serve --data-plane emulated --emulated-agents ...` or `sting-ctl scenario run`\n";
    return kExitUsage;
  }
  const int level = log_level(c);
  RealtimeRuntime runtime;
  RemoteBus bus(runtime, net::parse_host_port(c.controller));
  net::UdpTransport transport(runtime, net::parse_host_port(c.bind));
  AgentOptions ao;
  ao.device_id = c.device_id;
  ao.heartbeat_interval_ns = static_cast<std::int64_t>(c.heartbeat_s * 1e9);
  ao.seed_override = env_seed();
  ao.data_address = c.advertise;
  Agent agent(runtime, bus, transport, ao);
  std::promise<void> started;
  runtime.post([&] {
    agent.start();
    started.set_value();
  });
  started.get_future().wait();
  if (c.json)
    out << Json{{"device_id", c.device_id}, {"data", transport.local_address()}, {"controller", c.controller}}.dump()
        << std::endl;
  else if (level >= 0)
    out << "sting-agent " << c.device_id << " data " << transport.local_address() << " controller " << c.controller
        << std::endl;
  install_signal_handlers();
  std::uint64_t reported = 0;
  while (!g_interrupted && bus.connected()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    if (level >= 1) {
      std::promise<std::uint64_t> p;
      runtime.post([&] { p.set_value(agent.runs_completed()); });
      const auto done = p.get_future().get();
      if (done != reported) {
        reported = done;
        err << "sting-agent: run " << done << " reported\n";
      }
    }
  }
  std::promise<void> stopped;
  runtime.post([&] {
    agent.stop();
    stopped.set_value();
  });
  stopped.get_future().wait();
  runtime.stop();
  if (!bus.connected() && !g_interrupted) {
    err << "sting-agent: lost connection to controller\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_scenario(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto scenario = load_scenario_file(c.scenario_file);
  RunRecord record;
  if (!c.controller.empty()) {
    const auto started = http_json("POST", c.controller, "/runs", Json{{"scenario", scenario}});
    const auto run_id = started.at("run_id").get<std::string>();
    if (!c.json) out << "run " << run_id << " started" << std::endl;
    http_event_stream(c.controller, "/runs/" + run_id + "/live", [&](const std::string& kind, const Json& ev) {
      if (!c.json && (kind == "step_armed" || kind == "step_finished" || kind == "run_finished"))
        out << "  " << kind << " " << ev.value("detail", Json::object()).dump() << std::endl;
      return kind != "run_finished";
    });
    record = http_json("GET", c.controller, "/runs/" + run_id).get<RunRecord>();
  } else {
    if (scenario.transport.kind != "emulated") {
      err << "sting-ctl: scenario uses the udp transport; pass --controller <http-url>\n";
      return kExitUsage;
    }
    library::TestbedOptions opts;
    opts.store_root = c.store;
    opts.seed_override = env_seed();
    library::EmulatedTestbed testbed(scenario, opts);
    record = testbed.run(scenario);
  }
  if (c.json)
    out << Json(record).dump() << std::endl;
  else
    print_record(record, out);
  return record.status == "completed" ? kExitOk : kExitFailure;
}

int run_runs(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.subcommand == "runs-list") {
    RunStore store(c.store);
    const auto entries = store.list();
    if (c.json) {
      Json j = Json::array();
      for (const auto& e : entries)
        j.push_back(Json{{"run_id", e.run_id}, {"created_at_ns", e.created_at_ns}, {"status", e.status}});
      out << j.dump() << std::endl;
    } else {
      for (const auto& e : entries) out << e.run_id << "  " << e.status << "\n";
    }
    return kExitOk;
  }
  if (c.subcommand == "runs-show") {
    const auto record = load_runs(c).front();
    if (c.json)
      out << Json(record).dump(2) << std::endl;
    else
      print_record(record, out);
    return kExitOk;
  }
  if (c.subcommand == "runs-annotate") {
    RunStore store(c.store);
    auto record = store.load(c.run_ids.front());
    if (c.execution < 0 || c.execution >= static_cast<int>(record.executions.size())) {
      err << "sting-ctl: no execution " << c.execution << " in " << record.run_id << "\n";
      return kExitFailure;
    }
    auto& exec = record.executions[static_cast<std::size_t>(c.execution)];
    if (!exec.tracked || !std::isfinite(c.completion_time_s) || c.completion_time_s < 0) {
      err << "sting-ctl: execution " << c.execution << " is untracked or the time is negative\n";
      return kExitFailure;
    }
    exec.completion_time_s = c.completion_time_s;
    record.events.push_back(RunEvent{record.finished_at_ns, "annotation",
                                     {{"execution", c.execution}, {"completion_time_s", c.completion_time_s}}});
    store.persist(record);
    if (c.json) out << Json(record).dump() << std::endl;
    return kExitOk;
  }
  const auto summaries = summarize(load_runs(c), c.sut);
  const auto files = export_summaries(summaries, c.format, c.out_dir);
  if (c.json) {
    Json j = Json::array();
    for (const auto& f : files) j.push_back(f.string());
    out << j.dump() << std::endl;
  } else {
    for (const auto& f : files) out << f.string() << "\n";
  }
  return kExitOk;
}

int run_analyze(const CliConfig& c, std::ostream& out) {
  const auto summaries = summarize(load_runs(c), c.sut);
  Json increases = Json::object();
  const StepSummary* reference = nullptr;
  for (const auto& s : summaries)
    if (s.active_device_count == 0 && s.median_completion_s) reference = &s;
  if (reference)
    for (const auto& s : summaries)
      if (&s != reference && s.median_completion_s)
        increases[std::to_string(s.active_device_count)] = median_increase(*reference, s);
  std::vector<fs::path> files;
  if (!c.out_dir.empty()) files = export_summaries(summaries, "all", c.out_dir);
  if (c.json) {
    Json j{{"summaries", summaries_to_json(summaries)}, {"median_increase_pct", increases}};
    j["files"] = Json::array();
    for (const auto& f : files) j["files"].push_back(f.string());
    out << j.dump() << std::endl;
    return kExitOk;
  }
  print_summaries(summaries, out);
  for (const auto& [k, v] : increases.items())
    out << "median completion increase at " << k << " active: " << fmt(v.get<double>(), 1) << "%\n";
  for (const auto& f : files) out << f.string() << "\n";
  return kExitOk;
}

int run_demo(const CliConfig& c, std::ostream& out) {
  library::ContentionOptions o;
  o.interferer_counts.clear();
  for (int i = 0; i < c.steps; ++i) o.interferer_counts.push_back(2 * i);
  o.step_duration_s = c.step_duration_s;
  o.seed = c.seed;
  const auto scenario = library::build_functional_test(o);
  library::TestbedOptions opts;
  opts.seed_override = env_seed();
  library::EmulatedTestbed testbed(scenario, opts);
  const auto wall0 = std::chrono::steady_clock::now();
  const auto record = testbed.run(scenario);
  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  const auto summaries = summarize({record}, library::kSutDevice);
  fs::create_directories(c.out_dir);
  write_file_atomic(fs::path(c.out_dir) / "run.json", Json(record).dump(2));
  auto files = export_summaries(summaries, "all", c.out_dir);
  files.insert(files.begin(), fs::path(c.out_dir) / "run.json");
  const auto checks = check_contention_trend(summaries, o.sut_rate_bps, o.capacity_bps);
  bool ok = record.status == "completed";
  for (const auto& ch : checks) ok = ok && ch.passed;
  if (c.json) {
    Json j{{"run_id", record.run_id}, {"status", record.status}, {"wall_s", wall_s},
           {"summaries", summaries_to_json(summaries)}, {"checks", Json::array()}, {"files", Json::array()}};
    for (const auto& ch : checks) j["checks"].push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    for (const auto& f : files) j["files"].push_back(f.string());
    j["ok"] = ok;
    out << j.dump() << std::endl;
  } else {
    out << "run " << record.run_id << " " << record.status << " (" << fmt(c.steps * c.step_duration_s, 0)
        << " s virtual in " << fmt(wall_s, 2) << " s wall)\n";
    print_summaries(summaries, out);
    for (const auto& ch : checks)
      out << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    out << "wrote " << files.size() << " files to " << c.out_dir << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

CliConfig parse_args(const std::vector<std::string>& argv) {
  if (argv.empty()) throw UsageError("empty argument vector", "");
  const auto name = fs::path(argv.front()).filename().string();
  if (name.find("agent") != std::string::npos) return parse_agent(argv);
  return parse_ctl(argv);
}

CliConfig parse_args(int argc, const char* const* argv) {
  return parse_args(std::vector<std::string>(argv, argv + argc));
}

int run(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.subcommand == "serve") return run_serve(c, out);
  if (c.subcommand == "agent") return run_agent(c, out, err);
  if (c.subcommand == "scenario-run") return run_scenario(c, out, err);
  if (c.subcommand.rfind("runs-", 0) == 0) return run_runs(c, out, err);
  if (c.subcommand == "analyze") return run_analyze(c, out);
  if (c.subcommand == "demo") return run_demo(c, out);
  throw UsageError("no subcommand", "");
}

int main_entry(int argc, const char* const* argv) {
  CliConfig config;
  try {
    config = parse_args(argc, argv);
  } catch (const UsageError& e) {
    if (std::string(e.what()).empty()) {
      std::cout << e.usage();
      return kExitOk;
    }
    std::cerr << e.what() << "\n" << e.usage();
    return kExitUsage;
  }
  try {
    return run(config, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << config.program << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << config.program << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

std::vector<TrendCheck> check_contention_trend(const std::vector<StepSummary>& s, double sut_offered_bps,
                                               double capacity_bps) {
  std::vector<TrendCheck> checks;
  if (s.empty()) return {{"summaries present", false, "no summaries"}};

  TrendCheck goodput{"goodput non-increasing", true, ""};
  TrendCheck rtt{"mean RTT non-decreasing", true, ""};
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i + 1].mean_throughput_bps > s[i].mean_throughput_bps) {
      goodput.passed = false;
      goodput.detail = "rises from " + fmt(s[i].mean_throughput_bps * 1e-6) + " to " +
                       fmt(s[i + 1].mean_throughput_bps * 1e-6) + " Mbit/s at " +
                       std::to_string(s[i + 1].active_device_count) + " active";
    }
    const double a = s[i].rtt ? s[i].rtt->mean_ns : 0.0, b = s[i + 1].rtt ? s[i + 1].rtt->mean_ns : 0.0;
    if (!s[i + 1].rtt || b < a) {
      rtt.passed = false;
      rtt.detail = "falls from " + fmt(a * 1e-6) + " to " + fmt(b * 1e-6) + " ms at " +
                   std::to_string(s[i + 1].active_device_count) + " active";
    }
  }
  if (goodput.passed) {
    for (const auto& x : s) goodput.detail += fmt(x.mean_throughput_bps * 1e-6, 2) + " ";
    goodput.detail += "Mbit/s";
  }
  if (rtt.passed) {
    for (const auto& x : s) rtt.detail += (x.rtt ? fmt(x.rtt->mean_ns * 1e-6, 2) : "-") + " ";
    rtt.detail += "ms";
  }
  checks.push_back(goodput);
  checks.push_back(rtt);
  checks.push_back({"no frame drops without interference", s.front().frames_dropped == 0,
                    std::to_string(s.front().frames_dropped) + " dropped at " +
                        std::to_string(s.front().active_device_count) + " active"});

  const auto& last = s.back();
  if (s.size() > 1 && last.offered_load_bps >= 1.5 * capacity_bps) {
    checks.push_back({"goodput below half of offered when saturated",
                      last.mean_throughput_bps < 0.5 * sut_offered_bps,
                      fmt(last.mean_throughput_bps * 1e-6) + " of " + fmt(sut_offered_bps * 1e-6) + " Mbit/s"});
    const double base = s.front().rtt ? s.front().rtt->mean_ns : 0.0;
    const double top = last.rtt ? last.rtt->mean_ns : 0.0;
    checks.push_back({"RTT at least 5x uncongested when saturated", base > 0 && top >= 5.0 * base,
                      fmt(top / std::max(base, 1.0), 1) + "x"});
    checks.push_back({"frame drops when saturated", last.frames_dropped > 0,
                      std::to_string(last.frames_dropped) + " dropped"});
  }
  return checks;
}

}  // namespace sting::cli
