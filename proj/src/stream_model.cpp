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

#include "vst/stream_model.h"

#include <string>
#include <utility>

#include "vst/errors.h"

namespace vst {

using nlohmann::json;

std::vector<std::string> Clip::captions() const {
  std::vector<std::string> out;
  for (const auto& frame : frames) {
    if (frame.caption && !frame.caption->empty()) out.push_back(*frame.caption);
  }
  return out;
}

Clip make_clip(int clip_index, std::vector<FrameRecord> frames) {
  if (frames.empty()) throw ParameterError("clip needs at least one frame");
  Clip clip;
  clip.clip_index = clip_index;
  clip.first_frame = frames.front().frame_index;
  clip.last_frame = frames.back().frame_index;
  clip.start_time = frames.front().timestamp;
  clip.end_time = frames.back().timestamp;
  for (const auto& frame : frames) {
    clip.total_visual_tokens += frame.visual_token_count;
  }
  clip.frames = std::move(frames);
  return clip;
}

std::string_view to_string(ClockMode mode) {
  return mode == ClockMode::kVirtual ? "virtual_clock" : "real_time";
}

std::string_view to_string(DeadlinePolicy policy) {
  switch (policy) {
    case DeadlinePolicy::kBlock:
      return "block";
    case DeadlinePolicy::kDrop:
      return "drop";
    case DeadlinePolicy::kDefer:
      return "defer";
  }
  return "block";
}

ClockMode parse_clock_mode(std::string_view text) {
  if (text == "virtual_clock" || text == "virtual") return ClockMode::kVirtual;
  if (text == "real_time") return ClockMode::kRealTime;
  throw ParameterError("unknown clock mode: " + std::string(text));
}

DeadlinePolicy parse_deadline_policy(std::string_view text) {
  if (text == "block") return DeadlinePolicy::kBlock;
  if (text == "drop") return DeadlinePolicy::kDrop;
  if (text == "defer") return DeadlinePolicy::kDefer;
  throw ParameterError("unknown deadline policy: " + std::string(text));
}

DeadlinePolicy SessionConfig::effective_deadline_policy() const {
  if (deadline_policy) return *deadline_policy;
  return mode == ClockMode::kVirtual ? DeadlinePolicy::kBlock
                                     : DeadlinePolicy::kDrop;
}

void SessionConfig::validate() const {
  if (clip_capacity < 1) throw ParameterError("clip_capacity_L must be >= 1");
  if (max_thinking_times < 0) {
    throw ParameterError("max_thinking_times must be >= 0");
  }
  if (per_step_video_token_cap < 1) {
    throw ParameterError("per_step_video_token_cap must be >= 1");
  }
  if (clip_capacity > per_step_video_token_cap) {
    throw ParameterError(
        "clip_capacity_L must not exceed per_step_video_token_cap");
  }
  if (memory_budget_entries < 1) {
    throw ParameterError("memory.budget_entries must be >= 1");
  }
  if (memory_budget_chars < 1) {
    throw ParameterError("memory.budget_chars must be >= 1");
  }
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNegativeIndex:
      return "negative_index";
    case ViolationKind::kDuplicateIndex:
      return "duplicate_index";
    case ViolationKind::kDecreasingIndex:
      return "decreasing_index";
    case ViolationKind::kNegativeTimestamp:
      return "negative_timestamp";
    case ViolationKind::kDecreasingTimestamp:
      return "decreasing_timestamp";
    case ViolationKind::kNonPositiveTokens:
      return "non_positive_tokens";
  }
  return "unknown";
}

std::vector<StreamViolation> validate_stream(
    std::span<const FrameRecord> frames) {
  std::vector<StreamViolation> report;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& frame = frames[i];
    auto flag = [&](ViolationKind kind) {
      report.push_back({i, frame.frame_index, kind});
    };
    if (frame.frame_index < 0) flag(ViolationKind::kNegativeIndex);
    if (frame.timestamp.count() < 0) flag(ViolationKind::kNegativeTimestamp);
    if (frame.visual_token_count < 1) flag(ViolationKind::kNonPositiveTokens);
    if (i == 0) continue;
    const auto& prev = frames[i - 1];
    if (frame.frame_index == prev.frame_index) {
      flag(ViolationKind::kDuplicateIndex);
    } else if (frame.frame_index < prev.frame_index) {
      flag(ViolationKind::kDecreasingIndex);
    }
    if (frame.timestamp < prev.timestamp) {
      flag(ViolationKind::kDecreasingTimestamp);
    }
  }
  return report;
}

void to_json(json& j, const FrameRecord& frame) {
  j = json{{"frame_index", frame.frame_index},
           {"timestamp_s", to_seconds(frame.timestamp)},
           {"visual_tokens", frame.visual_token_count}};
  if (frame.caption) j["caption"] = *frame.caption;
}

void from_json(const json& j, FrameRecord& frame) {
  frame.frame_index = j.at("frame_index").get<std::int64_t>();
  frame.timestamp = from_seconds(j.at("timestamp_s").get<double>());
  frame.visual_token_count = j.at("visual_tokens").get<std::int64_t>();
  frame.caption.reset();
  if (auto it = j.find("caption"); it != j.end() && !it->is_null()) {
    frame.caption = it->get<std::string>();
  }
}

void to_json(json& j, const ThoughtEntry& entry) {
  j = json{{"clip_index", entry.clip_index},
           {"start_s", to_seconds(entry.start_time)},
           {"end_s", to_seconds(entry.end_time)},
           {"text", entry.text}};
  if (entry.generation_duration.count() != 0) {
    j["generation_s"] = to_seconds(entry.generation_duration);
  }
}

void from_json(const json& j, ThoughtEntry& entry) {
  entry.clip_index = j.at("clip_index").get<int>();
  entry.start_time = from_seconds(j.at("start_s").get<double>());
  entry.end_time = from_seconds(j.at("end_s").get<double>());
  entry.text = j.at("text").get<std::string>();
  entry.generation_duration = Millis(0);
  if (auto it = j.find("generation_s"); it != j.end()) {
    entry.generation_duration = from_seconds(it->get<double>());
  }
}

void to_json(json& j, const QueryEvent& query) {
  j = json{{"query_time_s", to_seconds(query.query_time)},
           {"question", query.question}};
  if (query.gold_answer) j["gold"] = *query.gold_answer;
}

void from_json(const json& j, QueryEvent& query) {
  query.query_time = from_seconds(j.at("query_time_s").get<double>());
  query.question = j.at("question").get<std::string>();
  query.gold_answer.reset();
  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
    query.gold_answer = it->is_string() ? it->get<std::string>() : it->dump();
  }
}

void to_json(json& j, const AnswerRecord& answer) {
  j = json{{"text", answer.text},
           {"answer_start_s", to_seconds(answer.answer_start_time)},
           {"answer_end_s", to_seconds(answer.answer_end_time)}};
  if (answer.boxed_answer) j["boxed"] = *answer.boxed_answer;
}

void from_json(const json& j, AnswerRecord& answer) {
  answer.text = j.at("text").get<std::string>();
  answer.answer_start_time = from_seconds(j.at("answer_start_s").get<double>());
  answer.answer_end_time = from_seconds(j.at("answer_end_s").get<double>());
  answer.boxed_answer.reset();
  if (auto it = j.find("boxed"); it != j.end() && !it->is_null()) {
    answer.boxed_answer = it->get<std::string>();
  }
}

void to_json(json& j, const Clip& clip) {
  j = json{{"clip_index", clip.clip_index},
           {"first_frame", clip.first_frame},
           {"last_frame", clip.last_frame},
           {"start_s", to_seconds(clip.start_time)},
           {"end_s", to_seconds(clip.end_time)},
           {"visual_tokens", clip.total_visual_tokens},
           {"frames", clip.frames}};
}

void from_json(const json& j, Clip& clip) {
  clip.clip_index = j.at("clip_index").get<int>();
  clip.first_frame = j.at("first_frame").get<std::int64_t>();
  clip.last_frame = j.at("last_frame").get<std::int64_t>();
  clip.start_time = from_seconds(j.at("start_s").get<double>());
  clip.end_time = from_seconds(j.at("end_s").get<double>());
  clip.total_visual_tokens = j.at("visual_tokens").get<std::int64_t>();
  clip.frames.clear();
  if (auto it = j.find("frames"); it != j.end()) {
    clip.frames = it->get<std::vector<FrameRecord>>();
  }
}

}  // namespace vst
