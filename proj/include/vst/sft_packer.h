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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vst/errors.h"
#include "vst/memory.h"
#include "vst/stream_model.h"

namespace vst {

class StructureError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The token cap cannot hold some unit. clip_index() names the offending
// clip/thought pair; unset means the final clip, query and answer.
class InfeasibleError : public ValidationError {
 public:
  InfeasibleError(std::optional<int> clip_index, const std::string& what)
      : ValidationError(what), clip_index_(clip_index) {}
  std::optional<int> clip_index() const { return clip_index_; }

 private:
  std::optional<int> clip_index_;
};

class AttributionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Visual-token placeholder for one clip.
struct ClipTokens {
  int clip_index = 1;
  Millis start_time{0};
  Millis end_time{0};
  std::int64_t visual_tokens = 0;

  bool operator==(const ClipTokens&) const = default;
};

struct FinalClip : ClipTokens {};

ClipTokens clip_tokens(const Clip& clip);

struct SftPair {
  ClipTokens clip;
  ThoughtEntry thought;

  bool operator==(const SftPair&) const = default;
};

struct SftTail {
  FinalClip final_clip;
  QueryEvent query;
  std::string answer;

  bool operator==(const SftTail&) const = default;
};

// Flattened element tags, in training-sequence order.
struct InitialMemory {
  MemoryState memory;
};
struct Thought {
  ThoughtEntry entry;
};
struct Query {
  QueryEvent query;
};
struct Answer {
  std::string text;
};
using SftElement =
    std::variant<InitialMemory, ClipTokens, Thought, FinalClip, Query, Answer>;

std::string_view element_kind(const SftElement& element);

// Initial memory, then (clip, thought) pairs, then the final clip, query and
// answer. Stored structurally so the ordering cannot break after construction.
struct SftSequence {
  MemoryState initial_memory;
  std::vector<SftPair> pairs;
  SftTail tail;

  std::vector<SftElement> elements() const;
};

// Throws StructureError unless |thoughts| == |clips| - 1, clip indices are
// consecutive, and thought k belongs to clip k.
SftSequence build_sequence(std::span<const Clip> clips,
                           std::span<const ThoughtEntry> thoughts,
                           QueryEvent query, std::string answer,
                           MemoryState initial_memory);

// One packed training segment. pairs cover clip indices
// (first_cutoff, last_cutoff]; only the final segment carries a tail.
struct SftSegment {
  int segment_index = 1;
  MemoryState carried_memory;
  std::vector<SftPair> pairs;
  std::optional<SftTail> tail;
  int first_cutoff = 0;  // last clip of the previous segment, 0 for the first
  int last_cutoff = 0;   // last clip index covered here
  std::int64_t estimated_tokens = 0;

  std::vector<SftElement> elements() const;
};

using TokenEstimator = std::function<std::int64_t(std::string_view)>;

inline constexpr double kDefaultWordTokenFactor = 1.3;

// ceil(whitespace-delimited words * factor).
TokenEstimator word_count_estimator(double factor = kDefaultWordTokenFactor);

// Greedy-maximal slicing under `max_tokens_per_segment`. Segment cost is the
// estimate of the rendered carried memory plus each pair's visual tokens and
// thought estimate, plus, for the last segment, the final clip's visual
// tokens and the query and answer estimates. Memory carried into segment n is
// update(memory carried into n-1, thoughts of segment n-1).
std::vector<SftSegment> segment_sequence(const SftSequence& seq,
                                         std::int64_t max_tokens_per_segment,
                                         const TokenEstimator& estimate);

enum class SourceKind {
  kTemplate,
  kMemory,
  kClip,
  kThought,
  kFinalClip,
  kQuery,
  kAnswer,
};

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  SourceKind kind = SourceKind::kTemplate;
  // Position of the source element in SftSegment::elements(); unset for
  // template text.
  std::optional<std::size_t> element;
};

struct RenderedSegment {
  std::string text;
  std::vector<SourceSpan> spans;
};

RenderedSegment render_segment(const SftSegment& segment);
// The whole sequence as a single unsliced segment.
RenderedSegment render_sequence(const SftSequence& seq);

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct LossMask {
  std::vector<TokenSpan> tokens;  // whitespace tokens of the rendering
  std::vector<bool> supervised;   // aligned with tokens

  std::size_t supervised_count() const;
};

// True exactly on tokens sourced from thought or answer text. Throws
// AttributionError for a token outside every span, a token crossing spans,
// or a span pointing at an element the segment does not have.
LossMask loss_mask(const SftSegment& segment, const RenderedSegment& rendering);

// Character spans of supervised text.
std::vector<TokenSpan> loss_spans(const RenderedSegment& rendering);

// Packed-output record: segment_index, carried_memory, elements, loss_spans
// (plus the rendered text the spans index into).
nlohmann::json segment_record(const SftSegment& segment);

// Input form for the `pack` command: initial_memory, clips, thoughts, query,
// answer.
SftSequence sequence_from_json(const nlohmann::json& j);

}  // namespace vst
