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

#include "vst/latency_sim.h"

#include <cmath>
#include <cstdio>

#include "vst/prompts.h"

namespace vst {

namespace {

std::string words(std::int64_t n, std::string_view last = {}) {
  std::string out;
  for (std::int64_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += (i + 1 == n && !last.empty()) ? std::string(last) : "tok";
  }
  return out;
}

SimulationRun run(const SyntheticStream& stream, Backend& backend) {
  const std::vector<QueryEvent> queries{stream.query};
  auto result = run_session(stream.config, stream.frames, queries, backend);
  SimulationRun out;
  out.report = measure_latency(result.transcript, 0);
  for (const auto& e : result.transcript) {
    if (e.kind == TranscriptKind::kThoughtCompleted ||
        e.kind == TranscriptKind::kAnswerCompleted) {
      out.generated_tokens += e.detail.value("tokens", std::int64_t{0});
    }
  }
  out.transcript = std::move(result.transcript);
  return out;
}

}  // namespace

void LatencyProfile::validate() const {
  if (!(frame_interarrival_s > 0.0)) {
    throw ParameterError("frame_interarrival_s must be positive");
  }
  if (clip_count < 1) throw ParameterError("clip_count must be >= 1");
  if (thought_tokens < 1) throw ParameterError("thought_tokens must be >= 1");
  if (answer_tokens < 1) throw ParameterError("answer_tokens must be >= 1");
  if (cot_tokens < 0) throw ParameterError("cot_tokens must be >= 0");
  if (!(generation_rate > 0.0)) {
    throw ParameterError("generation_rate must be positive");
  }
  if (prefill_s < 0.0) throw ParameterError("prefill_s must be >= 0");
  if (frames_per_clip < 2) throw ParameterError("frames_per_clip must be >= 2");
  if (tokens_per_frame < 1) {
    throw ParameterError("tokens_per_frame must be >= 1");
  }
}

LatencyProfile calibrated_profile() {
  LatencyProfile p;
  p.generation_rate = 50.0;
  p.answer_tokens = 28;
  p.cot_tokens = 412;
  p.thought_tokens = 40;
  p.frame_interarrival_s = 1.0;
  return p;
}

LatencyProfile parse_latency_profile(const std::vector<ConfigLine>& lines) {
  LatencyProfile p;
  for (const auto& line : lines) {
    const auto& k = line.key;
    const auto& v = line.value;
    if (k == "frame_interarrival_s") {
      p.frame_interarrival_s = parse_double(k, v);
    } else if (k == "clip_count") {
      p.clip_count = static_cast<int>(parse_int(k, v));
    } else if (k == "thought_tokens") {
      p.thought_tokens = parse_int(k, v);
    } else if (k == "answer_tokens") {
      p.answer_tokens = parse_int(k, v);
    } else if (k == "cot_tokens") {
      p.cot_tokens = parse_int(k, v);
    } else if (k == "generation_rate") {
      p.generation_rate = parse_double(k, v);
    } else if (k == "prefill_s") {
      p.prefill_s = parse_double(k, v);
    } else if (k == "frames_per_clip") {
      p.frames_per_clip = static_cast<int>(parse_int(k, v));
    } else if (k == "tokens_per_frame") {
      p.tokens_per_frame = parse_int(k, v);
    } else if (k == "deadline_policy") {
      p.deadline_policy = parse_deadline_policy(v);
    } else {
      throw UnknownKeyError(k);
    }
  }
  p.validate();
  return p;
}

LatencyProfile load_latency_profile(const std::filesystem::path& path) {
  return parse_latency_profile(parse_key_values_file(path));
}

RateModelBackend::RateModelBackend(double tokens_per_second, Millis prefill,
                                   std::int64_t thought_tokens,
                                   std::int64_t answer_tokens)
    : tokens_per_second_(tokens_per_second),
      prefill_(prefill),
      thought_tokens_(thought_tokens),
      answer_tokens_(answer_tokens) {
  if (!(tokens_per_second_ > 0.0)) {
    throw ParameterError("generation rate must be positive");
  }
}

Millis RateModelBackend::duration_for(std::int64_t tokens) const {
  return prefill_ + Millis(std::llround(static_cast<double>(tokens) * 1000.0 /
                                        tokens_per_second_));
}

GenerationResult RateModelBackend::generate(const GenerationRequest& request,
                                            Millis issued_at) {
  const bool answer = request.context.purpose == Purpose::kAnswer;
  const auto tokens = answer ? answer_tokens_ : thought_tokens_;
  GenerationResult result;
  result.text = answer ? words(tokens, inject_boxed("A")) : words(tokens);
  result.token_count = tokens;
  result.issued_at = issued_at;
  result.completed_at = issued_at + duration_for(tokens);
  result.deadline_missed =
      request.deadline.has_value() && result.completed_at > *request.deadline;
  return result;
}

SyntheticStream synthetic_stream(const LatencyProfile& profile) {
  profile.validate();
  SyntheticStream s;
  s.config.clip_capacity = profile.tokens_per_frame * profile.frames_per_clip;
  s.config.per_step_video_token_cap =
      std::max<std::int64_t>(s.config.clip_capacity, 8192);
  s.config.max_thinking_times = profile.clip_count;
  s.config.deadline_policy = profile.deadline_policy;
  s.config.memory_budget_entries =
      static_cast<std::size_t>(std::max(profile.clip_count, 1));
  s.config.memory_budget_chars = 1u << 20;

  const Millis gap = from_seconds(profile.frame_interarrival_s);
  const std::int64_t n =
      static_cast<std::int64_t>(profile.clip_count - 1) * profile.frames_per_clip +
      (profile.frames_per_clip - 1);
  for (std::int64_t i = 0; i < n; ++i) {
    FrameRecord f;
    f.frame_index = i;
    f.timestamp = gap * i;
    f.visual_token_count = profile.tokens_per_frame;
    s.frames.push_back(f);
  }
  s.query.query_time = gap * n;
  s.query.question = "Which option matches the scene?";
  s.query.gold_answer = "A";
  return s;
}

SimulationRun run_vst(const LatencyProfile& profile) {
  const auto stream = synthetic_stream(profile);
  RateModelBackend backend(profile.generation_rate,
                           from_seconds(profile.prefill_s),
                           profile.thought_tokens, profile.answer_tokens);
  return run(stream, backend);
}

SimulationRun run_postquery_cot(const LatencyProfile& profile) {
  auto stream = synthetic_stream(profile);
  stream.config.max_thinking_times = 0;
  RateModelBackend backend(profile.generation_rate,
                           from_seconds(profile.prefill_s),
                           profile.thought_tokens,
                           profile.cot_tokens + profile.answer_tokens);
  return run(stream, backend);
}

QaLatencyReport simulate_vst(const LatencyProfile& profile) {
  return run_vst(profile).report;
}

QaLatencyReport simulate_postquery_cot(const LatencyProfile& profile) {
  return run_postquery_cot(profile).report;
}

double speedup_report(const QaLatencyReport& vst, const QaLatencyReport& cot) {
  if (vst.qa_latency.count() <= 0) {
    throw DomainError("speedup needs a positive VST qa_latency");
  }
  return static_cast<double>(cot.qa_latency.count()) /
         static_cast<double>(vst.qa_latency.count());
}

std::string format_latency_table(const QaLatencyReport& vst,
                                 const QaLatencyReport& cot) {
  const double speedup = speedup_report(vst, cot);
  std::string out =
      "paradigm         qa_latency_s  thinking_s  overlapped_s  misses  "
      "speedup\n";
  char row[160];
  std::snprintf(row, sizeof row, "%-16s %12.3f %11.3f %13.3f %7d %8.2f\n",
                "vst", to_seconds(vst.qa_latency),
                to_seconds(vst.thinking_time_total),
                to_seconds(vst.thinking_time_overlapped), vst.deadline_misses,
                speedup);
  out += row;
  std::snprintf(row, sizeof row, "%-16s %12.3f %11.3f %13.3f %7d %8.2f\n",
                "postquery_cot", to_seconds(cot.qa_latency),
                to_seconds(cot.thinking_time_total),
                to_seconds(cot.thinking_time_overlapped), cot.deadline_misses,
                1.0);
  out += row;
  return out;
}

}  // namespace vst
