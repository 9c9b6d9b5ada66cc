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

#include "sting/run_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace sting {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
           << counter++;
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_ / "runs"); }

std::vector<RunIndexEntry> RunStore::read_index() const {
  std::vector<RunIndexEntry> out;
  std::ifstream in(root_ / "index.json");
  if (!in) return out;
  const auto j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("corrupt run index " + (root_ / "index.json").string());
  for (const auto& e : j.value("runs", Json::array()))
    out.push_back({e.at("run_id").get<std::string>(), e.at("created_at_ns").get<std::int64_t>(),
                   e.at("file").get<std::string>(), e.value("status", std::string{})});
  return out;
}

void RunStore::write_index(const std::vector<RunIndexEntry>& entries) const {
  Json runs = Json::array();
  for (const auto& e : entries)
    runs.push_back({{"run_id", e.run_id}, {"created_at_ns", e.created_at_ns}, {"file", e.file}, {"status", e.status}});
  write_file_atomic(root_ / "index.json", Json{{"schema_version", kSchemaVersion}, {"runs", runs}}.dump(2));
}

std::string RunStore::persist(const RunRecord& record) {
  const std::string doc = Json(record).dump();
  const std::string hash = sha256_hex(doc);
  const std::string file = "runs/" + hash + ".json";
  std::lock_guard lock(mu_);
  if (!fs::exists(root_ / file)) write_file_atomic(root_ / file, doc);
  auto entries = read_index();
  auto it = std::find_if(entries.begin(), entries.end(), [&](auto& e) { return e.run_id == record.run_id; });
  RunIndexEntry entry{record.run_id, record.created_at_ns, file, record.status};
  if (it == entries.end()) {
    entries.push_back(entry);
  } else {
    *it = entry;
  }
  write_index(entries);
  return hash;
}

std::string RunStore::load_raw(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  const auto entries = read_index();
  auto it = std::find_if(entries.begin(), entries.end(), [&](auto& e) { return e.run_id == run_id; });
  if (it == entries.end()) throw NotFound("no run " + run_id);
  std::ifstream in(root_ / it->file, std::ios::binary);
  if (!in) throw NotFound("run document missing for " + run_id);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunRecord RunStore::load(const std::string& run_id) const {
  const auto raw = load_raw(run_id);
  return parse_as<RunRecord>(Json::parse(raw), "run record");
}

bool RunStore::contains(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  const auto entries = read_index();
  return std::any_of(entries.begin(), entries.end(), [&](auto& e) { return e.run_id == run_id; });
}

std::vector<RunIndexEntry> RunStore::list() const {
  std::lock_guard lock(mu_);
  auto entries = read_index();
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.created_at_ns != b.created_at_ns ? a.created_at_ns < b.created_at_ns : a.run_id < b.run_id;
  });
  return entries;
}

}  // namespace sting
