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
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vst/backends.h"
#include "vst/errors.h"
#include "vst/memory.h"
#include "vst/segmenter.h"
#include "vst/stream_model.h"

namespace vst {

// An event stamped earlier than the session clock.
class ClockError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// An event that is impossible in the current session state.
class ProtocolError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Thrown by a transcript lacking the records a measurement needs.
class MeasurementError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class TranscriptKind {
  kClipClosed,
  kStepTrimmed,
  kThoughtStarted,
  kThoughtCompleted,
  kThoughtSkipped,
  kThoughtDeferred,
  kDeadlineMissed,
  kQueryArrived,
  kAnswerStarted,
  kAnswerCompleted,
  kGenerationFailed,
};

std::string_view to_string(TranscriptKind kind);

struct TranscriptEvent {
  std::size_t seq = 0;
  Millis at{0};
  TranscriptKind kind = TranscriptKind::kClipClosed;
  std::optional<int> clip_index;
  std::optional<int> query_index;
  // Kind-specific fields, written verbatim into the record.
  nlohmann::json detail = nlohmann::json::object();
};

// Append-only; seq is the position and `at` never decreases.
using SessionTranscript = std::vector<TranscriptEvent>;

nlohmann::json to_json(const TranscriptEvent& event);
void write_transcript(std::ostream& out, const SessionTranscript& transcript);

enum class GenerationKind { kThought, kAnswer };

struct FrameArrived {
  Millis at{0};
  FrameRecord frame;
};
struct GenerationCompleted {
  Millis at{0};
  std::uint64_t generation_id = 0;
  GenerationResult result;
};
struct GenerationFailed {
  Millis at{0};
  std::uint64_t generation_id = 0;
  std::string message;
};
struct QueryArrived {
  Millis at{0};
  QueryEvent query;
};
struct Tick {
  Millis at{0};
};

using Event = std::variant<FrameArrived, GenerationCompleted, GenerationFailed,
                           QueryArrived, Tick>;

Millis event_time(const Event& event);

// The driver runs `request` on its backend and reports back with the id.
struct IssueGeneration {
  std::uint64_t generation_id = 0;
  GenerationKind kind = GenerationKind::kThought;
  GenerationRequest request;
  int clip_index = 0;
  std::optional<int> query_index;
};
struct AnswerReady {
  int query_index = 0;
  AnswerRecord answer;
};
struct AnswerFailed {
  int query_index = 0;
  std::string message;
};

using Action = std::variant<IssueGeneration, AnswerReady, AnswerFailed>;

// Drops the earliest frames until the clip fits `cap`; a lone oversized frame
// is clamped to `cap`. Returns the number of frames removed.
std::size_t cap_step_tokens(Clip& clip, std::int64_t cap);

// One VST session. Every state change goes through step(), which is the only
// serialization point; drivers own the clock and the backend.
//
// Invariants: at most one generation in flight; thoughts issued never exceed
// max_thinking_times; transcript instants never decrease.
class Session {
 public:
  explicit Session(SessionConfig config);

  std::vector<Action> step(const Event& event);
  // Further queries raise ProtocolError.
  void close() { closed_ = true; }

  const SessionConfig& config() const { return config_; }
  const SessionTranscript& transcript() const { return transcript_; }
  const MemoryState& memory() const { return memory_; }
  Millis clock() const { return clock_; }
  int thoughts_emitted() const { return thoughts_emitted_; }
  int queries_received() const { return next_query_index_; }
  bool idle() const { return !in_flight_.has_value(); }
  bool stalled() const { return blocked_clip_.has_value(); }

 private:
  struct InFlight {
    std::uint64_t generation_id = 0;
    GenerationKind kind = GenerationKind::kThought;
    Clip clip;
    std::optional<int> query_index;
    Millis issued_at{0};
  };
  struct PendingQuery {
    int query_index = 0;
    QueryEvent query;
    Clip final_clip;
  };
  // Work held back by a blocked clip, replayed in arrival order.
  using Stalled = std::variant<FrameRecord, int>;

  void advance(Millis at);
  void log(TranscriptKind kind, std::optional<int> clip,
           std::optional<int> query, nlohmann::json detail = {});

  void on_frame(const FrameRecord& frame, std::vector<Action>& actions);
  void on_clip_closed(Clip clip, std::vector<Action>& actions);
  void process_query(int query_index, std::vector<Action>& actions);
  void on_completed(const GenerationCompleted& event,
                    std::vector<Action>& actions);
  void on_failed(const GenerationFailed& event, std::vector<Action>& actions);
  void dispatch_next(std::vector<Action>& actions);
  void replay_stalled(std::vector<Action>& actions);

  void issue_thought(Clip clip, std::vector<Action>& actions);
  void issue_answer(PendingQuery pending, std::vector<Action>& actions);
  Clip capped(Clip clip);

  SessionConfig config_;
  SegmenterState segmenter_;
  MemoryState memory_;
  Millis clock_{0};
  int thoughts_emitted_ = 0;
  int next_query_index_ = 0;
  std::uint64_t next_generation_id_ = 1;
  bool closed_ = false;

  std::optional<Clip> last_closed_clip_;
  std::optional<InFlight> in_flight_;
  std::deque<PendingQuery> pending_answers_;
  std::deque<Clip> deferred_;
  std::optional<Clip> blocked_clip_;
  std::deque<Stalled> stalled_;
  std::vector<QueryEvent> queries_;

  SessionTranscript transcript_;
};

struct SessionResult {
  SessionTranscript transcript;
  // Indexed by query; nullopt when the answer generation failed.
  std::vector<std::optional<AnswerRecord>> answers;
};

// A backend failure inside run_session. The partial transcript survives.
class SessionAborted : public RuntimeFailure {
 public:
  SessionAborted(const std::string& what, SessionTranscript transcript)
      : RuntimeFailure(what), transcript_(std::move(transcript)) {}
  const SessionTranscript& transcript() const { return transcript_; }

 private:
  SessionTranscript transcript_;
};

// Discrete-event driver over a virtual clock. Simultaneous events are ordered
// generation completions first, then frames, then queries, each in insertion
// order. Fully single-threaded: identical inputs give identical transcripts.
class VirtualDriver {
 public:
  // With `abort_on_backend_error`, a failed generation throws SessionAborted
  // once the failure is logged; otherwise the session carries on.
  VirtualDriver(SessionConfig config, Backend& backend,
                bool abort_on_backend_error = false);

  void add_frames(std::span<const FrameRecord> frames);
  void schedule_query(QueryEvent query);
  // Processes every queued event stamped <= `until`.
  void run_until(Millis until);
  // Processes events until every scheduled query has an outcome.
  void run_until_answered();

  const Session& session() const { return session_; }
  Millis clock() const { return session_.clock(); }
  bool pending_queries() const;
  const std::vector<std::optional<AnswerRecord>>& answers() const {
    return answers_;
  }
  // (query index, message) for each failed answer, in order.
  const std::vector<std::pair<int, std::string>>& failures() const {
    return failures_;
  }
  // Messages of failed generations of any kind, in order.
  const std::vector<std::string>& backend_errors() const {
    return backend_errors_;
  }

 private:
  struct Queued {
    Millis at;
    int priority;
    std::uint64_t order;
    Event event;
  };
  struct Later {
    bool operator()(const Queued& a, const Queued& b) const;
  };

  void push(Event event, int priority);
  bool pop_one(std::optional<Millis> until);
  void perform(std::vector<Action> actions);

  Session session_;
  Backend& backend_;
  bool abort_on_backend_error_;
  std::vector<Queued> heap_;
  std::uint64_t order_ = 0;
  int scheduled_queries_ = 0;
  std::vector<std::optional<AnswerRecord>> answers_;
  std::vector<bool> resolved_;
  std::vector<std::pair<int, std::string>> failures_;
  std::vector<std::string> backend_errors_;
};

struct RealTimeOptions {
  // Stream milliseconds per wall millisecond.
  double speed = 1.0;
};

// Virtual mode uses VirtualDriver; real-time mode plays frames and queries
// against the wall clock with generation on a worker thread. Throws
// SessionAborted when a backend call fails.
SessionResult run_session(const SessionConfig& config,
                          std::span<const FrameRecord> frames,
                          std::span<const QueryEvent> queries,
                          Backend& backend, RealTimeOptions realtime = {});

struct QaLatencyReport {
  Millis qa_latency{0};
  Millis thinking_time_total{0};
  Millis thinking_time_overlapped{0};
  int deadline_misses = 0;
  int thoughts = 0;
};

// Latency of query `query_index`. Thinking counts thoughts started before the
// query; the overlapped part is the share of each that ran before it.
QaLatencyReport measure_latency(const SessionTranscript& transcript,
                                int query_index = 0);

}  // namespace vst
