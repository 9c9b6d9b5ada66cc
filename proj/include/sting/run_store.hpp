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
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sting/scenario.hpp"

namespace sting {

class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct RunIndexEntry {
  std::string run_id;
  std::int64_t created_at_ns = 0;
  std::string file;
  std::string status;
};

/// Run records as one JSON document each, named by the SHA-256 of their
/// content, plus an index.json mapping run ids to the current document.
/// Writes go through a temp file and rename.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  /// Returns the content hash the record was stored under.
  std::string persist(const RunRecord& record);
  [[nodiscard]] RunRecord load(const std::string& run_id) const;
  [[nodiscard]] std::string load_raw(const std::string& run_id) const;
  [[nodiscard]] bool contains(const std::string& run_id) const;
  /// Ordered by created_at, then run_id.
  [[nodiscard]] std::vector<RunIndexEntry> list() const;

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }

 private:
  [[nodiscard]] std::vector<RunIndexEntry> read_index() const;
  void write_index(const std::vector<RunIndexEntry>& entries) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sting
