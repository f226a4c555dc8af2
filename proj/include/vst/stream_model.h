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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vst/time.h"

namespace vst {

// One sampled frame. Only its visual-token count matters to the runtime; the
// caption lets deterministic backends "see" something.
struct FrameRecord {
  std::int64_t frame_index = 0;
  Millis timestamp{0};
  std::int64_t visual_token_count = 1;
  std::optional<std::string> caption;

  bool operator==(const FrameRecord&) const = default;
};

// A contiguous run of frames closed by the token-capacity rule.
struct Clip {
  int clip_index = 1;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  Millis start_time{0};
  Millis end_time{0};
  std::int64_t total_visual_tokens = 0;
  std::vector<FrameRecord> frames;

  std::vector<std::string> captions() const;

  bool operator==(const Clip&) const = default;
};

// Builds a clip over `frames` (non-empty, in stream order).
Clip make_clip(int clip_index, std::vector<FrameRecord> frames);

struct ThoughtEntry {
  int clip_index = 1;
  Millis start_time{0};
  Millis end_time{0};
  std::string text;
  Millis generation_duration{0};

  bool operator==(const ThoughtEntry&) const = default;
};

struct QueryEvent {
  Millis query_time{0};
  std::string question;
  std::optional<std::string> gold_answer;

  bool operator==(const QueryEvent&) const = default;
};

struct AnswerRecord {
  std::string text;
  std::optional<std::string> boxed_answer;
  Millis answer_start_time{0};
  Millis answer_end_time{0};

  bool operator==(const AnswerRecord&) const = default;
};

enum class ClockMode { kVirtual, kRealTime };
enum class DeadlinePolicy { kBlock, kDrop, kDefer };

std::string_view to_string(ClockMode mode);
std::string_view to_string(DeadlinePolicy policy);
ClockMode parse_clock_mode(std::string_view text);
DeadlinePolicy parse_deadline_policy(std::string_view text);

struct SessionConfig {
  std::int64_t clip_capacity = 2048;
  int max_thinking_times = 4;
  std::int64_t per_step_video_token_cap = 8192;
  std::size_t memory_budget_entries = 16;
  std::size_t memory_budget_chars = 8000;
  ClockMode mode = ClockMode::kVirtual;
  // Unset means block under the virtual clock and drop in real time.
  std::optional<DeadlinePolicy> deadline_policy;

  DeadlinePolicy effective_deadline_policy() const;
  // Throws ParameterError naming the first bad field.
  void validate() const;
};

enum class ViolationKind {
  kNegativeIndex,
  kDuplicateIndex,
  kDecreasingIndex,
  kNegativeTimestamp,
  kDecreasingTimestamp,
  kNonPositiveTokens,
};

std::string_view to_string(ViolationKind kind);

struct StreamViolation {
  std::size_t position = 0;  // offset in the input sequence
  std::int64_t frame_index = 0;
  ViolationKind kind = ViolationKind::kDuplicateIndex;

  bool operator==(const StreamViolation&) const = default;
};

// Reports every violated FrameRecord invariant; empty iff well-formed.
std::vector<StreamViolation> validate_stream(std::span<const FrameRecord> frames);

// File forms. Frame traces use the keys frame_index, timestamp_s,
// visual_tokens, caption; memory entries use clip_index, start_s, end_s, text.
void to_json(nlohmann::json& j, const FrameRecord& frame);
void from_json(const nlohmann::json& j, FrameRecord& frame);
void to_json(nlohmann::json& j, const ThoughtEntry& entry);
void from_json(const nlohmann::json& j, ThoughtEntry& entry);
void to_json(nlohmann::json& j, const QueryEvent& query);
void from_json(const nlohmann::json& j, QueryEvent& query);
void to_json(nlohmann::json& j, const AnswerRecord& answer);
void from_json(const nlohmann::json& j, AnswerRecord& answer);
void to_json(nlohmann::json& j, const Clip& clip);
void from_json(const nlohmann::json& j, Clip& clip);

}  // namespace vst
