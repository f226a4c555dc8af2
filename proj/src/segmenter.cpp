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

#include "vst/segmenter.h"

#include <utility>

namespace vst {

IngestResult ingest_frame(SegmenterState state, const FrameRecord& frame,
                          std::int64_t capacity) {
  if (capacity < 1) throw ParameterError("clip capacity L must be >= 1");
  if (frame.visual_token_count < 1) {
    throw RejectedFrameError("visual_token_count",
                             "frame " + std::to_string(frame.frame_index) +
                                 " has no visual tokens");
  }
  if (frame.frame_index < 0 ||
      (state.last_frame_index && frame.frame_index <= *state.last_frame_index)) {
    throw RejectedFrameError("frame_index",
                             "frame index " + std::to_string(frame.frame_index) +
                                 " does not extend the stream");
  }
  if (frame.timestamp.count() < 0 ||
      (state.last_timestamp && frame.timestamp < *state.last_timestamp)) {
    throw RejectedFrameError("timestamp",
                             "frame " + std::to_string(frame.frame_index) +
                                 " goes back in time");
  }

  state.last_frame_index = frame.frame_index;
  state.last_timestamp = frame.timestamp;
  state.pending_frames.push_back(frame);
  state.accumulated_tokens += frame.visual_token_count;

  IngestResult result;
  if (state.accumulated_tokens >= capacity) {
    result.clip = make_clip(state.next_clip_index++,
                            std::exchange(state.pending_frames, {}));
    state.accumulated_tokens = 0;
  }
  result.state = std::move(state);
  return result;
}

FlushResult flush(SegmenterState state) {
  FlushResult result;
  if (!state.pending_frames.empty()) {
    result.clip = make_clip(state.next_clip_index++,
                            std::exchange(state.pending_frames, {}));
    state.accumulated_tokens = 0;
  }
  result.state = std::move(state);
  return result;
}

std::vector<Clip> segment_stream(std::span<const FrameRecord> frames,
                                 std::int64_t capacity, bool flush_tail) {
  std::vector<Clip> clips;
  SegmenterState state;
  for (const auto& frame : frames) {
    auto step = ingest_frame(std::move(state), frame, capacity);
    state = std::move(step.state);
    if (step.clip) clips.push_back(std::move(*step.clip));
  }
  if (flush_tail) {
    auto tail = flush(std::move(state));
    if (tail.clip) clips.push_back(std::move(*tail.clip));
  }
  return clips;
}

}  // namespace vst
