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

#include "vst/memory.h"

#include <utility>

namespace vst {

MemoryState make_memory(std::size_t budget_entries, std::size_t budget_chars) {
  if (budget_entries < 1 || budget_chars < 1) {
    throw ParameterError("memory budgets must be positive");
  }
  MemoryState memory;
  memory.budget_entries = budget_entries;
  memory.budget_chars = budget_chars;
  return memory;
}

std::string render_entry(const ThoughtEntry& entry) {
  return "Time " + format_seconds(entry.start_time) + "-" +
         format_seconds(entry.end_time) + "s: " + entry.text;
}

std::size_t rendered_chars(std::span<const ThoughtEntry> entries) {
  if (entries.empty()) return 0;
  std::size_t total = entries.size() - 1;
  for (const auto& entry : entries) total += render_entry(entry).size();
  return total;
}

MemoryState update(MemoryState memory,
                   std::span<const ThoughtEntry> new_thoughts) {
  int last = memory.entries.empty() ? 0 : memory.entries.back().clip_index;
  for (const auto& thought : new_thoughts) {
    if (thought.clip_index <= last) {
      throw OrderingError("thought for clip " +
                          std::to_string(thought.clip_index) +
                          " does not follow clip " + std::to_string(last));
    }
    last = thought.clip_index;
  }

  auto& entries = memory.entries;
  entries.insert(entries.end(), new_thoughts.begin(), new_thoughts.end());

  // Running total so eviction stays linear in the number of entries.
  std::size_t chars = rendered_chars(entries);
  std::size_t drop = 0;
  while (drop < entries.size() &&
         (entries.size() - drop > memory.budget_entries ||
          chars > memory.budget_chars)) {
    chars -= render_entry(entries[drop]).size();
    ++drop;
    // The separator before the new front entry goes with it.
    if (drop < entries.size()) --chars;
  }
  entries.erase(entries.begin(), entries.begin() + static_cast<long>(drop));
  return memory;
}

std::string render(const MemoryState& memory) {
  if (memory.entries.empty()) return std::string(kEmptyMemoryMarker);
  std::string out;
  for (const auto& entry : memory.entries) {
    if (!out.empty()) out += '\n';
    out += render_entry(entry);
  }
  return out;
}

}  // namespace vst
