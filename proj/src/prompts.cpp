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

#include "vst/prompts.h"

namespace vst {

namespace {

constexpr std::string_view kBoxOpen = "\\boxed{";

PromptParts assemble(std::string user) {
  PromptParts parts;
  parts.rendered = "[System]\n";
  parts.rendered += kAnalystPreamble;
  parts.rendered += '\n';
  parts.rendered += user;
  parts.messages.push_back({Role::kSystem, std::string(kAnalystPreamble)});
  parts.messages.push_back({Role::kUser, std::move(user)});
  return parts;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

std::string clip_timestamp(const Clip& clip) {
  return "Time " + format_seconds(clip.start_time) + "-" +
         format_seconds(clip.end_time) + "s";
}

std::string clip_placeholder(const Clip& clip) {
  return "<clip " + std::to_string(clip.clip_index) + ": " +
         std::to_string(clip.total_visual_tokens) + " visual tokens>";
}

std::string clip_block(const Clip& clip) {
  std::string out = clip_placeholder(clip);
  const auto captions = clip.captions();
  if (!captions.empty()) {
    out += " [captions: ";
    for (std::size_t i = 0; i < captions.size(); ++i) {
      if (i > 0) out += " | ";
      out += captions[i];
    }
    out += ']';
  }
  return out;
}

std::string query_timestamp(const QueryEvent& query) {
  return "Time " + format_seconds(query.query_time) + "s";
}

PromptParts thought_prompt(const MemoryState& memory, const Clip& clip) {
  std::string user = render(memory);
  user += '\n';
  user += clip_timestamp(clip) + " " + clip_block(clip);
  return assemble(std::move(user));
}

PromptParts answer_prompt(const MemoryState& memory, const Clip& clip,
                          const QueryEvent& query) {
  std::string user = render(memory);
  user += '\n';
  user += clip_timestamp(clip) + " " + clip_block(clip);
  user += '\n';
  user += query_timestamp(query);
  user += ' ';
  user += kAnswerInstruction;
  user += '\n';
  user += query.question;
  user += '\n';
  user += kBoxedInstruction;
  user += '\n';
  user += kAnswerCue;
  return assemble(std::move(user));
}

std::optional<std::string> extract_boxed(std::string_view text) {
  std::optional<std::string> last;
  std::size_t pos = 0;
  while ((pos = text.find(kBoxOpen, pos)) != std::string_view::npos) {
    const std::size_t begin = pos + kBoxOpen.size();
    int depth = 1;
    std::size_t i = begin;
    for (; i < text.size(); ++i) {
      if (text[i] == '{') {
        ++depth;
      } else if (text[i] == '}' && --depth == 0) {
        break;
      }
    }
    if (depth != 0) {
      // Unterminated: skip this opener and keep looking.
      pos = begin;
      continue;
    }
    last = std::string(text.substr(begin, i - begin));
    pos = i + 1;
  }
  return last;
}

std::string inject_boxed(std::string_view value) {
  std::string out(kBoxOpen);
  out += value;
  out += '}';
  return out;
}

}  // namespace vst
