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
#include <filesystem>
#include <string>
#include <vector>

#include "vst/backends.h"
#include "vst/config.h"
#include "vst/orchestrator.h"
#include "vst/stream_model.h"

namespace vst {

// Generation is modeled at a constant rate plus a fixed prefill per call.
struct LatencyProfile {
  double frame_interarrival_s = 1.0;
  int clip_count = 8;
  std::int64_t thought_tokens = 40;
  std::int64_t answer_tokens = 28;
  std::int64_t cot_tokens = 412;
  double generation_rate = 50.0;  // tokens per second
  double prefill_s = 0.0;
  int frames_per_clip = 2;  // >= 2 so the query always flushes a partial clip
  std::int64_t tokens_per_frame = 64;
  DeadlinePolicy deadline_policy = DeadlinePolicy::kBlock;

  // ParameterError naming the first non-positive field.
  void validate() const;
};

// Rate 50 tok/s: 28 answer tokens take 0.56 s and 412 + 28 take 8.80 s.
LatencyProfile calibrated_profile();

LatencyProfile parse_latency_profile(const std::vector<ConfigLine>& lines);
LatencyProfile load_latency_profile(const std::filesystem::path& path);

// Emits exactly the configured token counts: thoughts of `thought_tokens`
// words, answers of `answer_tokens` words ending in a boxed letter.
class RateModelBackend : public Backend {
 public:
  RateModelBackend(double tokens_per_second, Millis prefill,
                   std::int64_t thought_tokens, std::int64_t answer_tokens);
  GenerationResult generate(const GenerationRequest& request,
                            Millis issued_at) override;
  std::string_view name() const override { return "rate_model"; }

  Millis duration_for(std::int64_t tokens) const;

 private:
  double tokens_per_second_;
  Millis prefill_;
  std::int64_t thought_tokens_;
  std::int64_t answer_tokens_;
};

// (clip_count - 1) full clips, then frames_per_clip - 1 frames of a partial
// clip; the query lands one inter-arrival after the last frame.
struct SyntheticStream {
  SessionConfig config;
  std::vector<FrameRecord> frames;
  QueryEvent query;
};

SyntheticStream synthetic_stream(const LatencyProfile& profile);

struct SimulationRun {
  QaLatencyReport report;
  SessionTranscript transcript;
  std::int64_t generated_tokens = 0;
};

SimulationRun run_vst(const LatencyProfile& profile);
SimulationRun run_postquery_cot(const LatencyProfile& profile);
QaLatencyReport simulate_vst(const LatencyProfile& profile);
QaLatencyReport simulate_postquery_cot(const LatencyProfile& profile);

// cot / vst. DomainError unless vst.qa_latency > 0.
double speedup_report(const QaLatencyReport& vst, const QaLatencyReport& cot);

// Rows: paradigm, qa_latency, thinking, overlapped thinking, misses, speedup.
std::string format_latency_table(const QaLatencyReport& vst,
                                 const QaLatencyReport& cot);

}  // namespace vst
