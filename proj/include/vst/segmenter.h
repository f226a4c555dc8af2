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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vst/errors.h"
#include "vst/stream_model.h"

namespace vst {

// Raised when a frame would break stream monotonicity or carries no tokens.
// field() names the offending FrameRecord member.
class RejectedFrameError : public ValidationError {
 public:
  RejectedFrameError(std::string field, const std::string& what)
      : ValidationError(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Running buffer for the token-capacity boundary rule. Between emissions
// accumulated_tokens < L and equals the sum over pending_frames.
struct SegmenterState {
  std::vector<FrameRecord> pending_frames;
  std::int64_t accumulated_tokens = 0;
  int next_clip_index = 1;
  // Last frame accepted, kept across resets for the monotonicity check.
  std::optional<std::int64_t> last_frame_index;
  std::optional<Millis> last_timestamp;
};

struct IngestResult {
  SegmenterState state;
  std::optional<Clip> clip;
};

// Appends `frame`; once accumulated tokens reach `capacity` (>= L, the closing
// frame included) every pending frame is emitted as one clip.
IngestResult ingest_frame(SegmenterState state, const FrameRecord& frame,
                          std::int64_t capacity);

struct FlushResult {
  SegmenterState state;
  std::optional<Clip> clip;
};

// Emits whatever is pending as a short final clip.
FlushResult flush(SegmenterState state);

// Convenience: segment a whole stream. The trailing partial clip is included
// only when `flush_tail` is set.
std::vector<Clip> segment_stream(std::span<const FrameRecord> frames,
                                 std::int64_t capacity, bool flush_tail);

}  // namespace vst
