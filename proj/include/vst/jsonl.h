/* Copyright 2026 The VST Runtime Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "vst/errors.h"

namespace vst {

// Line-delimited JSON. Blank lines are skipped; any malformed line raises
// ParseError carrying "<source>:<line>".
std::vector<nlohmann::json> read_jsonl(std::istream& in,
                                       const std::string& source);
std::vector<nlohmann::json> read_jsonl_file(const std::filesystem::path& path);

void write_jsonl(std::ostream& out, const std::vector<nlohmann::json>& records);

template <typename T>
std::vector<T> records_from_json(const std::vector<nlohmann::json>& lines,
                                 const std::string& source) {
  std::vector<T> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(lines[i].get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source + ": record " + std::to_string(i + 1) + ": " +
                       e.what());
    }
  }
  return out;
}

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path) {
  return records_from_json<T>(read_jsonl_file(path), path.string());
}

}  // namespace vst
