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

// Thin binding: structured values cross the boundary as JSON text and the
// Python package turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sting/analysis.hpp"
#include "sting/cli.hpp"
#include "sting/probe_protocol.hpp"
#include "sting/run_store.hpp"
#include "sting/scenario_library.hpp"

namespace py = pybind11;
using namespace sting;

namespace {

library::ContentionOptions contention_options(const std::string& text, library::ContentionOptions o) {
  const auto j = Json::parse(text.empty() ? "{}" : text);
  o.capacity_bps = j.value("capacity_bps", o.capacity_bps);
  o.sut_rate_bps = j.value("sut_rate_bps", o.sut_rate_bps);
  o.interferer_rate_bps = j.value("interferer_rate_bps", o.interferer_rate_bps);
  o.interferer_counts = j.value("interferer_counts", o.interferer_counts);
  o.step_duration_s = j.value("step_duration_s", o.step_duration_s);
  o.seed = j.value("seed", o.seed);
  return o;
}

std::vector<RunRecord> parse_records(const std::vector<std::string>& texts) {
  std::vector<RunRecord> out;
  for (const auto& t : texts) out.push_back(parse_as<RunRecord>(Json::parse(t), "run record"));
  return out;
}

}  // namespace

PYBIND11_MODULE(_sting, m) {
  m.doc() = "STING native core";
  m.attr("PROTOCOL_VERSION") = kProtocolVersion;
  m.attr("HEADER_BYTES") = kHeaderBytes;

  py::register_exception<ProbeError>(m, "ProbeError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_ValueError);
  py::register_exception<NotFound>(m, "NotFound", PyExc_KeyError);

  m.def(
      "encode_probe",
      [](int type, std::uint16_t flow_id, std::uint64_t seq, std::uint64_t tx_ns, std::uint64_t rx_ns,
         std::uint64_t resp_tx_ns, std::uint32_t frame_id, std::uint16_t fragment_index, std::uint16_t fragment_count,
         std::size_t size) {
        if (type < 0 || type > 2) throw ProbeError(ProbeErrc::BadType);
        ProbePacket p{static_cast<PacketType>(type), flow_id, seq, tx_ns, rx_ns, resp_tx_ns, frame_id, fragment_index,
                      fragment_count};
        const auto bytes = encode(p, size);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("type"), py::arg("flow_id"), py::arg("seq"), py::arg("tx_timestamp_ns"), py::arg("responder_rx_ns") = 0,
      py::arg("responder_tx_ns") = 0, py::arg("frame_id") = 0, py::arg("fragment_index") = 0,
      py::arg("fragment_count") = 1, py::arg("size") = kHeaderBytes);

  m.def("decode_probe", [](const py::bytes& data) {
    const std::string s = data;
    const auto p = decode({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    py::dict d;
    d["type"] = static_cast<int>(p.type);
    d["flow_id"] = p.flow_id;
    d["seq"] = p.seq;
    d["tx_timestamp_ns"] = p.tx_timestamp_ns;
    d["responder_rx_ns"] = p.responder_rx_ns;
    d["responder_tx_ns"] = p.responder_tx_ns;
    d["frame_id"] = p.frame_id;
    d["fragment_index"] = p.fragment_index;
    d["fragment_count"] = p.fragment_count;
    return d;
  });

  m.def(
      "departures",
      [](const std::string& profile, std::size_t count, std::int64_t start_ns) {
        const auto p = parse_as<DeviceTrafficProfile>(Json::parse(profile), "profile");
        validate(p);
        Schedule s(p, start_ns);
        std::vector<std::tuple<std::int64_t, std::uint16_t, std::uint64_t, std::uint32_t>> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count && !s.empty(); ++i) {
          const auto d = s.next();
          out.emplace_back(d.time_ns, d.flow_id, d.seq, d.payload_bytes);
        }
        return out;
      },
      py::arg("profile_json"), py::arg("count"), py::arg("start_ns") = 0);

  m.def("offered_load", [](const std::string& profile) {
    return offered_load(parse_as<DeviceTrafficProfile>(Json::parse(profile), "profile"));
  });

  m.def("functional_test", [](const std::string& options) {
    return Json(library::build_functional_test(contention_options(options, {}))).dump();
  }, py::arg("options_json") = "");
  m.def("parcours_test", [](const std::string& options) {
    return Json(library::build_parcours_test(contention_options(options, library::parcours_defaults()))).dump();
  }, py::arg("options_json") = "");
  m.def("validate_scenario", [](const std::string& text) { validate(parse_as<Scenario>(Json::parse(text), "scenario")); });

  m.def(
      "run_emulated",
      [](const std::string& scenario_text, std::optional<std::uint64_t> seed, const std::string& store_root) {
        const auto scenario = parse_as<Scenario>(Json::parse(scenario_text), "scenario");
        py::gil_scoped_release release;
        library::TestbedOptions o;
        o.seed_override = seed;
        o.store_root = store_root;
        library::EmulatedTestbed bed(scenario, o);
        return Json(bed.run(scenario)).dump();
      },
      py::arg("scenario_json"), py::arg("seed") = py::none(), py::arg("store_root") = "");

  m.def(
      "summarize",
      [](const std::vector<std::string>& records, const std::string& sut, bool with_series) {
        return summaries_to_json(summarize(parse_records(records), sut), with_series).dump();
      },
      py::arg("records_json"), py::arg("sut") = library::kSutDevice, py::arg("with_series") = false);

  m.def(
      "export",
      [](const std::vector<std::string>& records, const std::string& sut, const std::string& format,
         const std::string& out_dir) {
        std::vector<std::string> paths;
        for (const auto& p : export_summaries(summarize(parse_records(records), sut), format, out_dir))
          paths.push_back(p.string());
        return paths;
      },
      py::arg("records_json"), py::arg("sut"), py::arg("format"), py::arg("out_dir"));

  m.def("median_increase", py::overload_cast<double, double>(&median_increase), py::arg("reference_median"),
        py::arg("loaded_median"));

  m.def(
      "contention_checks",
      [](const std::vector<std::string>& records, const std::string& sut, double sut_offered, double capacity) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : cli::check_contention_trend(summarize(parse_records(records), sut), sut_offered, capacity))
          out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("records_json"), py::arg("sut"), py::arg("sut_offered_bps"), py::arg("capacity_bps"));

  m.def("store_list", [](const std::string& root) {
    std::vector<std::tuple<std::string, std::int64_t, std::string>> out;
    for (const auto& e : RunStore(root).list()) out.emplace_back(e.run_id, e.created_at_ns, e.status);
    return out;
  });
  m.def("store_load", [](const std::string& root, const std::string& run_id) { return RunStore(root).load_raw(run_id); });
}
