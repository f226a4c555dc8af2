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

#include "vst/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace vst {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

ConfigLine split_line(std::string_view body, std::string where) {
  const auto eq = body.find('=');
  if (eq == std::string_view::npos) {
    throw ParseError(where + ": expected key = value");
  }
  ConfigLine line{std::string(trim(body.substr(0, eq))),
                  std::string(trim(body.substr(eq + 1))), std::move(where)};
  if (line.key.empty()) throw ParseError(line.where + ": empty key");
  return line;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  const auto v = parse_int(key, value);
  if (v < 0) throw ParameterError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<ConfigLine> parse_key_values(std::istream& in,
                                         const std::string& source) {
  std::vector<ConfigLine> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view body = raw;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    lines.push_back(split_line(body, source + ":" + std::to_string(number)));
  }
  return lines;
}

std::vector<ConfigLine> parse_key_values_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_key_values(in, path.string());
}

ConfigLine parse_override(std::string_view text) {
  return split_line(trim(text), "--set " + std::string(text));
}

std::int64_t parse_int(std::string_view key, std::string_view value) {
  std::int64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ParameterError(std::string(key) + ": expected an integer, got '" +
                         std::string(value) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty() || !std::isfinite(out)) {
    throw ParameterError(std::string(key) + ": expected a number, got '" +
                         std::string(value) + "'");
  }
  return out;
}

void apply_setting(RunConfig& config, const ConfigLine& line) {
  const std::string& k = line.key;
  const std::string& v = line.value;
  auto& s = config.session;
  auto& b = config.backend;
  if (k == "clip_capacity_L") {
    s.clip_capacity = parse_int(k, v);
  } else if (k == "max_thinking_times") {
    s.max_thinking_times = static_cast<int>(parse_int(k, v));
  } else if (k == "per_step_video_token_cap") {
    s.per_step_video_token_cap = parse_int(k, v);
  } else if (k == "deadline_policy") {
    s.deadline_policy = parse_deadline_policy(v);
  } else if (k == "mode") {
    s.mode = parse_clock_mode(v);
  } else if (k == "memory.budget_entries") {
    s.memory_budget_entries = parse_size(k, v);
  } else if (k == "memory.budget_chars") {
    s.memory_budget_chars = parse_size(k, v);
  } else if (k == "backend.kind") {
    b.kind = v;
  } else if (k == "backend.url") {
    b.url = v;
  } else if (k == "backend.model") {
    b.model = v;
  } else if (k == "backend.trace") {
    b.trace = v;
  } else if (k == "backend.rate") {
    b.tokens_per_second = parse_double(k, v);
  } else if (k == "backend.bearer_token") {
    b.bearer_token = v;
  } else if (k == "realtime.speed") {
    config.realtime.speed = parse_double(k, v);
  } else {
    throw UnknownKeyError(k);
  }
}

RunConfig make_run_config(const std::vector<ConfigLine>& lines,
                          const std::vector<std::string>& overrides) {
  RunConfig config;
  for (const auto& line : lines) apply_setting(config, line);
  for (const auto& text : overrides) apply_setting(config, parse_override(text));
  config.session.validate();
  if (!(config.backend.tokens_per_second > 0.0)) {
    throw ParameterError("backend.rate must be positive");
  }
  if (!(config.realtime.speed > 0.0)) {
    throw ParameterError("realtime.speed must be positive");
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  return make_run_config(parse_key_values_file(path), overrides);
}

}  // namespace vst
