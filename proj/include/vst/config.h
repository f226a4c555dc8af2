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
#include <string_view>
#include <vector>

#include "vst/backends.h"
#include "vst/errors.h"
#include "vst/orchestrator.h"
#include "vst/stream_model.h"

namespace vst {

class UnknownKeyError : public ValidationError {
 public:
  explicit UnknownKeyError(std::string key)
      : ValidationError("unknown configuration key: " + key),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigLine {
  std::string key;
  std::string value;
  std::string where;  // "<source>:<line>"
};

// Flat `key = value` lines. `#` starts a comment; blank lines are skipped;
// surrounding whitespace is trimmed. A line without '=' raises ParseError.
std::vector<ConfigLine> parse_key_values(std::istream& in,
                                         const std::string& source);
std::vector<ConfigLine> parse_key_values_file(
    const std::filesystem::path& path);
// `key=value` as given on the command line.
ConfigLine parse_override(std::string_view text);

// Strict numeric parsing; the error names `key`.
std::int64_t parse_int(std::string_view key, std::string_view value);
double parse_double(std::string_view key, std::string_view value);

struct RunConfig {
  SessionConfig session;
  BackendConfig backend;
  RealTimeOptions realtime;
};

// Applies one setting; throws UnknownKeyError for keys outside the schema.
void apply_setting(RunConfig& config, const ConfigLine& line);

// File values first, then overrides in order. The result is validated.
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides);
RunConfig make_run_config(const std::vector<ConfigLine>& lines,
                          const std::vector<std::string>& overrides);

}  // namespace vst
