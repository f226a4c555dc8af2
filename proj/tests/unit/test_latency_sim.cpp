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

#include <gtest/gtest.h>

#include <sstream>

#include "test_support.h"
#include "vst/latency_sim.h"

namespace vst {
namespace {

TEST(LatencySim, CalibratedProfileMatchesTargets) {
  const auto p = calibrated_profile();
  const auto vst = simulate_vst(p);
  const auto cot = simulate_postquery_cot(p);
  EXPECT_EQ(vst.qa_latency, Millis(560));
  EXPECT_EQ(cot.qa_latency, Millis(8800));
  EXPECT_NEAR(speedup_report(vst, cot), 15.71, 0.01);
  EXPECT_EQ(cot.thinking_time_total, Millis(0));
  EXPECT_GT(vst.thinking_time_total, Millis(0));
}

TEST(LatencySim, RateModelEmitsExactTokenCounts) {
  RateModelBackend backend(50.0, Millis(20), 40, 28);
  GenerationRequest thought;
  thought.context.purpose = Purpose::kThought;
  const auto t = backend.generate(thought, Millis(100));
  EXPECT_EQ(count_tokens(t.text), 40);
  EXPECT_EQ(t.completed_at, Millis(100 + 20 + 800));
  GenerationRequest answer;
  answer.context.purpose = Purpose::kAnswer;
  const auto a = backend.generate(answer, Millis(0));
  EXPECT_EQ(count_tokens(a.text), 28);
  EXPECT_EQ(extract_boxed(a.text), "A");
}

TEST(LatencySim, SyntheticStreamShape) {
  auto p = calibrated_profile();
  p.clip_count = 3;
  p.frames_per_clip = 2;
  const auto s = synthetic_stream(p);
  EXPECT_EQ(s.frames.size(), 5u);
  EXPECT_EQ(s.query.query_time, Millis(5000));
  const auto run = run_vst(p);
  int closed = 0;
  for (const auto& e : run.transcript) {
    closed += e.kind == TranscriptKind::kClipClosed ? 1 : 0;
  }
  EXPECT_EQ(closed, 3);
}

TEST(LatencySim, QaLatencyIndependentOfClipCount) {
  const auto base = simulate_vst(calibrated_profile()).qa_latency;
  for (int n : {1, 2, 4, 8, 16, 32}) {
    auto p = calibrated_profile();
    p.clip_count = n;
    const auto r = simulate_vst(p);
    EXPECT_EQ(r.qa_latency, base) << n;
    EXPECT_EQ(r.deadline_misses, 0);
    EXPECT_EQ(r.thinking_time_overlapped, r.thinking_time_total);
  }
}

TEST(LatencySim, SlowThoughtsThatOverrunGapsCostLatency) {
  auto p = calibrated_profile();
  p.thought_tokens = 200;  // 4 s per thought, 2 s per clip
  const auto r = simulate_vst(p);
  EXPECT_GT(r.deadline_misses, 0);
  EXPECT_GT(r.qa_latency, Millis(560));
}

TEST(LatencySim, ProfileParsingAndValidation) {
  std::istringstream in(
      "generation_rate = 25\nclip_count = 4\ndeadline_policy = drop\n");
  const auto p = parse_latency_profile(parse_key_values(in, "test"));
  EXPECT_EQ(p.generation_rate, 25.0);
  EXPECT_EQ(p.clip_count, 4);
  EXPECT_EQ(p.deadline_policy, DeadlinePolicy::kDrop);
  std::istringstream bad("warp = 9\n");
  EXPECT_THROW(parse_latency_profile(parse_key_values(bad, "test")),
               UnknownKeyError);
  auto q = calibrated_profile();
  q.frames_per_clip = 1;
  EXPECT_THROW(q.validate(), ParameterError);
  q = calibrated_profile();
  q.generation_rate = 0;
  EXPECT_THROW(q.validate(), ParameterError);
  const auto loaded =
      load_latency_profile(testing::data_path("latency_profile.conf"));
  EXPECT_EQ(loaded.cot_tokens, 412);
}

TEST(LatencySim, SpeedupNeedsPositiveLatency) {
  QaLatencyReport zero;
  EXPECT_THROW(speedup_report(zero, zero), DomainError);
}

TEST(LatencySim, TableHasBothParadigms) {
  const auto p = calibrated_profile();
  const auto table =
      format_latency_table(simulate_vst(p), simulate_postquery_cot(p));
  EXPECT_NE(table.find("vst"), std::string::npos);
  EXPECT_NE(table.find("postquery_cot"), std::string::npos);
  EXPECT_NE(table.find("15.71"), std::string::npos);
}

}  // namespace
}  // namespace vst
