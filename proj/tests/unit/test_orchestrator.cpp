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
#include "vst/orchestrator.h"

namespace vst {
namespace {

using testing::regular_stream;

SessionConfig config(int cap, std::optional<DeadlinePolicy> policy = {}) {
  SessionConfig c;
  c.clip_capacity = 8;
  c.max_thinking_times = cap;
  c.deadline_policy = policy;
  return c;
}

int count(const SessionTranscript& t, TranscriptKind kind) {
  return static_cast<int>(std::count_if(
      t.begin(), t.end(), [&](const auto& e) { return e.kind == kind; }));
}

int count_reason(const SessionTranscript& t, const std::string& reason) {
  return static_cast<int>(std::count_if(t.begin(), t.end(), [&](const auto& e) {
    return e.kind == TranscriptKind::kThoughtSkipped &&
           e.detail.value("reason", "") == reason;
  }));
}

std::optional<TranscriptEvent> first(const SessionTranscript& t,
                                     TranscriptKind kind, int clip) {
  for (const auto& e : t) {
    if (e.kind == kind && e.clip_index == clip) return e;
  }
  return std::nullopt;
}

QueryEvent query_at(std::int64_t ms, std::optional<std::string> gold = {}) {
  return QueryEvent{Millis(ms), "What happened?", std::move(gold)};
}

// Frames of 4 tokens every second; L = 8 closes a clip every two frames.
SessionResult run(const SessionConfig& c, std::size_t frames,
                  std::vector<QueryEvent> queries, Backend& backend) {
  const auto stream = regular_stream(frames, 4, Millis(1000));
  return run_session(c, stream, queries, backend);
}

TEST(Orchestrator, ThreeClipsThenQueryYieldThreeThoughts) {
  MockSummarizer mock;
  const auto r = run(config(4), 7, {query_at(6500)}, mock);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kThoughtStarted), 3);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kThoughtCompleted), 3);
  // The seventh frame becomes the flushed final clip.
  const auto final_clip = first(r.transcript, TranscriptKind::kClipClosed, 4);
  ASSERT_TRUE(final_clip);
  EXPECT_TRUE(final_clip->detail.at("final").get<bool>());
  ASSERT_TRUE(r.answers.at(0));
}

TEST(Orchestrator, QueryBeforeAnyClipAnswersOverFlushedClip) {
  MockSummarizer mock;
  const auto r = run(config(4), 1, {query_at(500, "0")}, mock);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kThoughtStarted), 0);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kAnswerCompleted), 1);
  EXPECT_EQ(r.answers.at(0)->boxed_answer, "0");
}

TEST(Orchestrator, QueryWithNoFramesUsesEmptyClip) {
  MockSummarizer mock;
  const auto r = run(config(4), 0, {query_at(100)}, mock);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kClipClosed), 0);
  EXPECT_TRUE(r.answers.at(0).has_value());
}

TEST(Orchestrator, CapOfOneSkipsTheRest) {
  MockSummarizer mock;
  const auto r = run(config(1), 8, {query_at(8000)}, mock);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kThoughtCompleted), 1);
  EXPECT_EQ(count_reason(r.transcript, "cap"), 3);
}

TEST(Orchestrator, AnswerPromptCarriesMemoryAtQueryTime) {
  MockSummarizer mock;
  const auto r = run(config(4), 4, {query_at(4000, "scene 1")}, mock);
  // Gold "scene 1" only appears in the first clip's thought, so the mock can
  // only box it by reading memory.
  EXPECT_EQ(r.answers.at(0)->boxed_answer, "scene 1");
}

TEST(Orchestrator, DeterministicTranscripts) {
  MockSummarizer mock;
  std::ostringstream a, b;
  write_transcript(a, run(config(4), 9, {query_at(9000)}, mock).transcript);
  write_transcript(b, run(config(4), 9, {query_at(9000)}, mock).transcript);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}

TEST(Orchestrator, TranscriptIsMonotoneAndPaired) {
  MockSummarizer slow(MockSummarizerOptions{1.0});
  const auto r = run(config(16, DeadlinePolicy::kDefer), 12,
                     {query_at(6000), query_at(11000)}, slow);
  Millis last{0};
  int open = 0;
  for (std::size_t i = 0; i < r.transcript.size(); ++i) {
    const auto& e = r.transcript[i];
    EXPECT_EQ(e.seq, i);
    EXPECT_GE(e.at, last);
    last = e.at;
    if (e.kind == TranscriptKind::kThoughtStarted ||
        e.kind == TranscriptKind::kAnswerStarted) {
      ++open;
    }
    if (e.kind == TranscriptKind::kThoughtCompleted ||
        e.kind == TranscriptKind::kAnswerCompleted) {
      --open;
    }
    EXPECT_GE(open, 0);
    EXPECT_LE(open, 1);
  }
}

TEST(Orchestrator, CausalityNoClipBeforeItsFrames) {
  MockSummarizer mock;
  const auto r = run(config(16), 10, {query_at(9500)}, mock);
  for (const auto& e : r.transcript) {
    if (e.kind == TranscriptKind::kClipClosed) {
      EXPECT_GE(e.at.count(), e.detail.at("end_ms").get<std::int64_t>());
    }
  }
}

// Thoughts take 4 s while clips close every 2 s.
TEST(DeadlinePolicy, DropSkipsOverlappingClips) {
  MockSummarizer slow(MockSummarizerOptions{1.0});
  const auto r = run(config(16, DeadlinePolicy::kDrop), 8, {query_at(8000)}, slow);
  EXPECT_GT(count_reason(r.transcript, "deadline"), 0);
  EXPECT_EQ(count(r.transcript, TranscriptKind::kDeadlineMissed),
            count_reason(r.transcript, "deadline"));
}

TEST(DeadlinePolicy, DeferStartsTheClipAtCompletion) {
  MockSummarizer slow(MockSummarizerOptions{1.0});
  const auto r =
      run(config(16, DeadlinePolicy::kDefer), 8, {query_at(20000)}, slow);
  const auto deferred = first(r.transcript, TranscriptKind::kThoughtDeferred, 2);
  ASSERT_TRUE(deferred);
  const auto started = first(r.transcript, TranscriptKind::kThoughtStarted, 2);
  const auto done = first(r.transcript, TranscriptKind::kThoughtCompleted, 1);
  ASSERT_TRUE(started && done);
  EXPECT_EQ(started->at, done->at);
}

TEST(DeadlinePolicy, QueryDiscardsDeferredThoughts) {
  MockSummarizer slow(MockSummarizerOptions{1.0});
  const auto r =
      run(config(16, DeadlinePolicy::kDefer), 8, {query_at(3500)}, slow);
  EXPECT_EQ(count_reason(r.transcript, "query"), 1);
}

TEST(DeadlinePolicy, BlockStallsIngestionAndCountsOneMissPerClip) {
  MockSummarizer slow(MockSummarizerOptions{1.0});
  const auto r = run(config(16, DeadlinePolicy::kBlock), 8,
                     {query_at(8000)}, slow);
  const int misses = count(r.transcript, TranscriptKind::kDeadlineMissed);
  EXPECT_GT(misses, 0);
  EXPECT_EQ(count_reason(r.transcript, "deadline"), 0);
  std::set<int> missed_clips;
  for (const auto& e : r.transcript) {
    if (e.kind == TranscriptKind::kDeadlineMissed) {
      EXPECT_TRUE(missed_clips.insert(*e.clip_index).second);
    }
  }
  // Clip 3 cannot close before clip 2's blocked thought starts at 5 s.
  const auto clip3 = first(r.transcript, TranscriptKind::kClipClosed, 3);
  ASSERT_TRUE(clip3);
  EXPECT_GE(clip3->at, Millis(5000));
  const auto report = measure_latency(r.transcript, 0);
  EXPECT_EQ(report.deadline_misses, misses);
}

TEST(Orchestrator, CapGridRespectsMinOfClipsAndCap) {
  for (int cap : {1, 4, 16}) {
    for (std::size_t frames : {0u, 3u, 6u, 10u, 40u}) {
      MockSummarizer mock;
      const auto r = run(config(cap), frames,
                         {query_at(static_cast<std::int64_t>(frames) * 1000)},
                         mock);
      const int closed = static_cast<int>(frames / 2);
      EXPECT_EQ(count(r.transcript, TranscriptKind::kThoughtStarted),
                std::min(closed, cap))
          << cap << " " << frames;
    }
  }
}

TEST(Orchestrator, TwoQueriesShareEvolvingMemory) {
  MockSummarizer mock;
  const auto r = run(config(16), 10,
                     {query_at(3500, "scene 1"), query_at(9500, "scene 7")},
                     mock);
  ASSERT_EQ(r.answers.size(), 2u);
  EXPECT_EQ(r.answers[0]->boxed_answer, "scene 1");
  EXPECT_EQ(r.answers[1]->boxed_answer, "scene 7");
  const auto q0 = measure_latency(r.transcript, 0);
  const auto q1 = measure_latency(r.transcript, 1);
  EXPECT_LT(q0.thoughts, q1.thoughts);
}

TEST(Orchestrator, PerStepCapTrimsEarliestFrames) {
  auto c = config(4);
  c.per_step_video_token_cap = 10;
  // Two 6-token frames overshoot L = 8 and the cap of 10.
  const std::vector<FrameRecord> frames{
      FrameRecord{0, Millis(0), 6, "first"}, FrameRecord{1, Millis(1000), 6, "second"}};
  const std::vector<QueryEvent> queries{query_at(2000)};
  MockSummarizer mock;
  const auto r = run_session(c, frames, queries, mock);
  const auto trimmed = first(r.transcript, TranscriptKind::kStepTrimmed, 1);
  ASSERT_TRUE(trimmed);
  EXPECT_EQ(trimmed->detail.at("dropped_frames"), 1);
  const auto started = first(r.transcript, TranscriptKind::kThoughtStarted, 1);
  EXPECT_EQ(started->detail.at("visual_tokens"), 6);
  const auto done = first(r.transcript, TranscriptKind::kThoughtCompleted, 1);
  EXPECT_EQ(done->detail.at("text"), "second");
}

TEST(Orchestrator, CapStepTokensClampsLoneFrame) {
  Clip clip = make_clip(1, {FrameRecord{0, Millis(0), 50, std::nullopt}});
  EXPECT_EQ(cap_step_tokens(clip, 10), 0u);
  EXPECT_EQ(clip.total_visual_tokens, 10);
  EXPECT_THROW(cap_step_tokens(clip, 0), ParameterError);
}

TEST(Session, RejectsEventsInThePastAndLateQueries) {
  Session s(config(4));
  s.step(Tick{Millis(100)});
  EXPECT_THROW(s.step(Tick{Millis(50)}), ClockError);
  EXPECT_THROW(s.step(FrameArrived{Millis(200),
                                   FrameRecord{0, Millis(300), 1, std::nullopt}}),
               ClockError);
  EXPECT_THROW(s.step(GenerationCompleted{Millis(200), 42, {}}), ProtocolError);
  s.close();
  EXPECT_THROW(s.step(QueryArrived{Millis(300), query_at(300)}), ProtocolError);
}

TEST(Orchestrator, BackendFailureAbortsWithPartialTranscript) {
  ReplayBackend replay(std::vector<ReplayRecord>{{"", 0, "first", Millis(10)}});
  try {
    run(config(4), 6, {query_at(6000)}, replay);
    FAIL();
  } catch (const SessionAborted& e) {
    ASSERT_FALSE(e.transcript().empty());
    EXPECT_EQ(e.transcript().back().kind, TranscriptKind::kGenerationFailed);
    EXPECT_EQ(count(e.transcript(), TranscriptKind::kThoughtCompleted), 1);
  }
}

TEST(Orchestrator, DriverWithoutAbortRecordsFailures) {
  ReplayBackend replay(std::vector<ReplayRecord>{});
  VirtualDriver driver(config(4), replay);
  const auto stream = regular_stream(4, 4, Millis(1000));
  driver.add_frames(stream);
  driver.schedule_query(query_at(4000));
  driver.run_until_answered();
  ASSERT_EQ(driver.failures().size(), 1u);
  EXPECT_EQ(driver.failures()[0].first, 0);
  EXPECT_EQ(driver.backend_errors().size(), 3u);
}

TEST(Orchestrator, ReplayReproducesRecordedAnswers) {
  ReplayBackend replay(
      ReplayBackend::load_trace(testing::data_path("replay_trace.jsonl")));
  const auto r = run(config(4), 5, {query_at(5000)}, replay);
  EXPECT_EQ(r.answers.at(0)->text, "The cup is red. \\boxed{A}");
}

TEST(MeasureLatency, AnswerTimeExcludesAmortizedThinking) {
  for (std::size_t frames : {2u, 6u, 12u}) {
    MockSummarizer mock;
    const auto r = run(config(16), frames,
                       {query_at(static_cast<std::int64_t>(frames) * 1000, "x")},
                       mock);
    const auto report = measure_latency(r.transcript);
    // Fallback answer has 7 words at 20 tokens per second.
    EXPECT_EQ(report.qa_latency, Millis(350));
    EXPECT_EQ(report.thinking_time_overlapped, report.thinking_time_total);
  }
}

TEST(MeasureLatency, ZeroThoughtsAndMissingRecords) {
  MockSummarizer mock;
  const auto r = run(config(4), 1, {query_at(1000)}, mock);
  const auto report = measure_latency(r.transcript);
  EXPECT_EQ(report.thinking_time_total, Millis(0));
  EXPECT_EQ(report.thoughts, 0);
  EXPECT_THROW(measure_latency(r.transcript, 3), MeasurementError);
  auto truncated = r.transcript;
  truncated.pop_back();
  EXPECT_THROW(measure_latency(truncated), MeasurementError);
}

TEST(Orchestrator, RealTimeModeAnswers) {
  auto c = config(4);
  c.mode = ClockMode::kRealTime;
  MockSummarizer mock(MockSummarizerOptions{2000.0});
  const auto stream = regular_stream(4, 4, Millis(100));
  const std::vector<QueryEvent> queries{query_at(450, "scene 1")};
  const auto r = run_session(c, stream, queries, mock, RealTimeOptions{4.0});
  ASSERT_TRUE(r.answers.at(0));
  EXPECT_EQ(count(r.transcript, TranscriptKind::kAnswerCompleted), 1);
}

}  // namespace
}  // namespace vst
