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

#include "vst/jsonl.h"
#include "vst/stream_model.h"
#include "vst/time.h"

namespace vst {
namespace {

TEST(Time, FromSecondsRoundsToMillis) {
  EXPECT_EQ(from_seconds(12.5), Millis(12500));
  EXPECT_EQ(from_seconds(0.0004), Millis(0));
  EXPECT_EQ(from_seconds(0.0006), Millis(1));
  EXPECT_THROW(from_seconds(std::nan("")), DomainError);
}

TEST(Time, FormatSecondsRoundsHalfUpOnTenths) {
  EXPECT_EQ(format_seconds(Millis(12500)), "12.5");
  EXPECT_EQ(format_seconds(Millis(12549)), "12.5");
  EXPECT_EQ(format_seconds(Millis(12550)), "12.6");
  EXPECT_EQ(format_seconds(Millis(0)), "0.0");
  EXPECT_EQ(format_seconds(Millis(30000)), "30.0");
}

TEST(StreamModel, ValidateStreamReportsEveryViolation) {
  std::vector<FrameRecord> frames(4);
  frames[0] = {0, Millis(0), 4, std::nullopt};
  frames[1] = {0, Millis(10), 4, std::nullopt};
  frames[2] = {1, Millis(5), 0, std::nullopt};
  frames[3] = {-1, Millis(-2), 1, std::nullopt};
  const auto v = validate_stream(frames);
  auto has = [&](std::size_t pos, ViolationKind kind) {
    return std::any_of(v.begin(), v.end(), [&](const StreamViolation& s) {
      return s.position == pos && s.kind == kind;
    });
  };
  EXPECT_TRUE(has(1, ViolationKind::kDuplicateIndex));
  EXPECT_TRUE(has(2, ViolationKind::kDecreasingTimestamp));
  EXPECT_TRUE(has(2, ViolationKind::kNonPositiveTokens));
  EXPECT_TRUE(has(3, ViolationKind::kNegativeIndex));
  EXPECT_TRUE(has(3, ViolationKind::kNegativeTimestamp));
}

TEST(StreamModel, WellFormedStreamHasNoViolations) {
  std::vector<FrameRecord> frames{{0, Millis(0), 4, std::nullopt},
                                  {2, Millis(0), 1, std::nullopt},
                                  {3, Millis(9), 9, std::nullopt}};
  EXPECT_TRUE(validate_stream(frames).empty());
}

TEST(StreamModel, FrameJsonRoundTrip) {
  FrameRecord f{7, Millis(1250), 64, std::string("a dog")};
  nlohmann::json j = f;
  EXPECT_EQ(j.at("timestamp_s").get<double>(), 1.25);
  EXPECT_EQ(j.get<FrameRecord>(), f);
}

TEST(StreamModel, QueryGoldMayBeNumeric) {
  auto q = nlohmann::json::parse(R"({"query_time_s": 3, "question": "n?", "gold": 4})")
               .get<QueryEvent>();
  EXPECT_EQ(q.query_time, Millis(3000));
  ASSERT_TRUE(q.gold_answer);
  EXPECT_EQ(*q.gold_answer, "4");
}

TEST(StreamModel, DefaultsAndDeadlinePolicy) {
  SessionConfig c;
  EXPECT_EQ(c.per_step_video_token_cap, 8192);
  EXPECT_EQ(c.max_thinking_times, 4);
  EXPECT_EQ(c.effective_deadline_policy(), DeadlinePolicy::kBlock);
  c.mode = ClockMode::kRealTime;
  EXPECT_EQ(c.effective_deadline_policy(), DeadlinePolicy::kDrop);
  c.deadline_policy = DeadlinePolicy::kDefer;
  EXPECT_EQ(c.effective_deadline_policy(), DeadlinePolicy::kDefer);
}

TEST(StreamModel, ConfigRejectsCapacityAboveStepCap) {
  SessionConfig c;
  c.clip_capacity = 9000;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Jsonl, SkipsBlankLinesAndLocatesErrors) {
  std::istringstream ok("{\"a\":1}\n\n{\"a\":2}\n");
  EXPECT_EQ(read_jsonl(ok, "mem").size(), 2u);
  std::istringstream bad("{\"a\":1}\n{oops\n");
  try {
    read_jsonl(bad, "trace.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("trace.jsonl:2"), std::string::npos);
  }
}

}  // namespace
}  // namespace vst
