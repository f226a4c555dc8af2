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
#include <span>
#include <string>
#include <vector>

#include "vst/errors.h"
#include "vst/stream_model.h"

namespace vst {

class OrderingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline constexpr std::size_t kDefaultMemoryEntries = 16;
inline constexpr std::size_t kDefaultMemoryChars = 8000;
inline constexpr std::string_view kEmptyMemoryMarker = "[Memory: empty]";

// Long-term textual memory: streaming thoughts, oldest first. Both budgets
// hold after every update; eviction drops whole entries from the front.
struct MemoryState {
  std::vector<ThoughtEntry> entries;
  std::size_t budget_entries = kDefaultMemoryEntries;
  std::size_t budget_chars = kDefaultMemoryChars;

  bool operator==(const MemoryState&) const = default;
};

MemoryState make_memory(std::size_t budget_entries, std::size_t budget_chars);

// `Time <start>-<end>s: <text>`
std::string render_entry(const ThoughtEntry& entry);

// Characters the entries occupy once rendered (blocks joined by '\n').
// Zero for an empty list; the empty marker is not charged to the budget.
std::size_t rendered_chars(std::span<const ThoughtEntry> entries);

// Appends in order, then evicts from the front while either budget is
// exceeded. Throws OrderingError unless clip indices strictly increase past
// the newest stored entry.
MemoryState update(MemoryState memory,
                   std::span<const ThoughtEntry> new_thoughts);

std::string render(const MemoryState& memory);

}  // namespace vst
