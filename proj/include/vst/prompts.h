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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vst/memory.h"
#include "vst/stream_model.h"

namespace vst {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

inline constexpr std::string_view kAnalystPreamble =
    "You are a Streaming Video Analyst.";
inline constexpr std::string_view kAnswerInstruction =
    "Based on the provided Video Memory and the Current Video Clip, answer "
    "the following Problem.";
inline constexpr std::string_view kBoxedInstruction =
    "Output the final answer in \\boxed{}";
inline constexpr std::string_view kAnswerCue = "Your answer:";

// `Time 0.0-12.5s`
std::string clip_timestamp(const Clip& clip);
// `<clip k: N visual tokens>`; deployments substitute encoder output here.
std::string clip_placeholder(const Clip& clip);
// Placeholder plus captions, when the clip has any.
std::string clip_block(const Clip& clip);
// `Time 30.0s`
std::string query_timestamp(const QueryEvent& query);

struct PromptParts {
  std::vector<Message> messages;
  std::string rendered;
};

// "[System]" layout: preamble, memory, `{TimeStamp} {VideoClip}`.
PromptParts thought_prompt(const MemoryState& memory, const Clip& clip);
// As above, then the query time, problem and boxed-answer instruction,
// ending with `Your answer:`.
PromptParts answer_prompt(const MemoryState& memory, const Clip& clip,
                          const QueryEvent& query);

// Interior of the last \boxed{...} span, braces balanced. Spans are scanned
// left to right without overlap, so a nested box yields its outer span.
std::optional<std::string> extract_boxed(std::string_view text);
std::string inject_boxed(std::string_view value);

}  // namespace vst
