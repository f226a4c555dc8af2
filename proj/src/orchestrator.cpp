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

#include "vst/orchestrator.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "vst/prompts.h"

namespace vst {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json clip_detail(const Clip& clip, bool final_clip) {
  return json{{"first_frame", clip.first_frame},
              {"last_frame", clip.last_frame},
              {"start_ms", clip.start_time.count()},
              {"end_ms", clip.end_time.count()},
              {"visual_tokens", clip.total_visual_tokens},
              {"final", final_clip}};
}

}  // namespace

std::string_view to_string(TranscriptKind kind) {
  switch (kind) {
    case TranscriptKind::kClipClosed:
      return "ClipClosed";
    case TranscriptKind::kStepTrimmed:
      return "StepTrimmed";
    case TranscriptKind::kThoughtStarted:
      return "ThoughtStarted";
    case TranscriptKind::kThoughtCompleted:
      return "ThoughtCompleted";
    case TranscriptKind::kThoughtSkipped:
      return "ThoughtSkipped";
    case TranscriptKind::kThoughtDeferred:
      return "ThoughtDeferred";
    case TranscriptKind::kDeadlineMissed:
      return "DeadlineMissed";
    case TranscriptKind::kQueryArrived:
      return "QueryArrived";
    case TranscriptKind::kAnswerStarted:
      return "AnswerStarted";
    case TranscriptKind::kAnswerCompleted:
      return "AnswerCompleted";
    case TranscriptKind::kGenerationFailed:
      return "GenerationFailed";
  }
  return "ClipClosed";
}

json to_json(const TranscriptEvent& event) {
  json j = event.detail.is_object() ? event.detail : json::object();
  j["seq"] = event.seq;
  j["t_ms"] = event.at.count();
  j["event"] = to_string(event.kind);
  if (event.clip_index) j["clip_index"] = *event.clip_index;
  if (event.query_index) j["query_index"] = *event.query_index;
  return j;
}

void write_transcript(std::ostream& out, const SessionTranscript& transcript) {
  for (const auto& event : transcript) out << to_json(event).dump() << '\n';
}

Millis event_time(const Event& event) {
  return std::visit([](const auto& e) { return e.at; }, event);
}

std::size_t cap_step_tokens(Clip& clip, std::int64_t cap) {
  if (cap < 1) throw ParameterError("per-step token cap must be >= 1");
  std::size_t dropped = 0;
  while (clip.total_visual_tokens > cap && clip.frames.size() > 1) {
    clip.total_visual_tokens -= clip.frames.front().visual_token_count;
    clip.frames.erase(clip.frames.begin());
    ++dropped;
  }
  if (clip.total_visual_tokens > cap) {
    clip.frames.front().visual_token_count = cap;
    clip.total_visual_tokens = cap;
  }
  if (!clip.frames.empty()) {
    clip.first_frame = clip.frames.front().frame_index;
    clip.start_time = clip.frames.front().timestamp;
  }
  return dropped;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(SessionConfig config) : config_(std::move(config)) {
  config_.validate();
  memory_ = make_memory(config_.memory_budget_entries,
                        config_.memory_budget_chars);
}

void Session::advance(Millis at) {
  if (at < clock_) {
    throw ClockError("event at " + std::to_string(at.count()) +
                     "ms precedes session clock " +
                     std::to_string(clock_.count()) + "ms");
  }
  clock_ = at;
}

void Session::log(TranscriptKind kind, std::optional<int> clip,
                  std::optional<int> query, json detail) {
  TranscriptEvent event;
  event.seq = transcript_.size();
  event.at = clock_;
  event.kind = kind;
  event.clip_index = clip;
  event.query_index = query;
  if (detail.is_object()) event.detail = std::move(detail);
  transcript_.push_back(std::move(event));
}

std::vector<Action> Session::step(const Event& event) {
  advance(event_time(event));
  std::vector<Action> actions;
  std::visit(
      Overloaded{
          [&](const FrameArrived& e) {
            if (e.frame.timestamp > e.at) {
              throw ClockError("frame " + std::to_string(e.frame.frame_index) +
                               " delivered before its timestamp");
            }
            if (blocked_clip_) {
              stalled_.emplace_back(e.frame);
            } else {
              on_frame(e.frame, actions);
            }
          },
          [&](const GenerationCompleted& e) { on_completed(e, actions); },
          [&](const GenerationFailed& e) { on_failed(e, actions); },
          [&](const QueryArrived& e) {
            if (closed_) throw ProtocolError("query after session close");
            if (e.query.query_time > e.at) {
              throw ClockError("query delivered before its query time");
            }
            const int index = next_query_index_++;
            queries_.push_back(e.query);
            log(TranscriptKind::kQueryArrived, std::nullopt, index,
                {{"question", e.query.question},
                 {"query_time_ms", e.query.query_time.count()}});
            if (blocked_clip_) {
              stalled_.emplace_back(index);
            } else {
              process_query(index, actions);
            }
          },
          [&](const Tick&) {},
      },
      event);
  return actions;
}

void Session::on_frame(const FrameRecord& frame, std::vector<Action>& actions) {
  auto result = ingest_frame(segmenter_, frame, config_.clip_capacity);
  segmenter_ = std::move(result.state);
  if (result.clip) on_clip_closed(std::move(*result.clip), actions);
}

void Session::on_clip_closed(Clip clip, std::vector<Action>& actions) {
  log(TranscriptKind::kClipClosed, clip.clip_index, std::nullopt,
      clip_detail(clip, false));
  last_closed_clip_ = clip;

  const auto planned = static_cast<std::size_t>(thoughts_emitted_) +
                       deferred_.size() + (blocked_clip_ ? 1 : 0);
  if (planned >= static_cast<std::size_t>(config_.max_thinking_times)) {
    log(TranscriptKind::kThoughtSkipped, clip.clip_index, std::nullopt,
        {{"reason", "cap"}});
    return;
  }
  if (!in_flight_) {
    issue_thought(std::move(clip), actions);
    return;
  }

  const auto policy = config_.effective_deadline_policy();
  log(TranscriptKind::kDeadlineMissed, clip.clip_index, std::nullopt,
      {{"policy", to_string(policy)}});
  switch (policy) {
    case DeadlinePolicy::kDrop:
      log(TranscriptKind::kThoughtSkipped, clip.clip_index, std::nullopt,
          {{"reason", "deadline"}});
      break;
    case DeadlinePolicy::kDefer:
      log(TranscriptKind::kThoughtDeferred, clip.clip_index, std::nullopt);
      deferred_.push_back(std::move(clip));
      break;
    case DeadlinePolicy::kBlock:
      blocked_clip_ = std::move(clip);
      break;
  }
}

void Session::process_query(int query_index, std::vector<Action>& actions) {
  for (const auto& clip : deferred_) {
    log(TranscriptKind::kThoughtSkipped, clip.clip_index, std::nullopt,
        {{"reason", "query"}});
  }
  deferred_.clear();

  PendingQuery pending;
  pending.query_index = query_index;
  pending.query = queries_.at(static_cast<std::size_t>(query_index));

  auto flushed = flush(segmenter_);
  segmenter_ = std::move(flushed.state);
  if (flushed.clip) {
    log(TranscriptKind::kClipClosed, flushed.clip->clip_index, query_index,
        clip_detail(*flushed.clip, true));
    last_closed_clip_ = *flushed.clip;
    pending.final_clip = std::move(*flushed.clip);
  } else if (last_closed_clip_) {
    pending.final_clip = *last_closed_clip_;
  } else {
    // Nothing seen yet: answer over an empty clip at the query instant.
    pending.final_clip.clip_index = segmenter_.next_clip_index;
    pending.final_clip.start_time = clock_;
    pending.final_clip.end_time = clock_;
  }

  if (in_flight_) {
    pending_answers_.push_back(std::move(pending));
  } else {
    issue_answer(std::move(pending), actions);
  }
}

Clip Session::capped(Clip clip) {
  const auto before = clip.total_visual_tokens;
  const auto dropped = cap_step_tokens(clip, config_.per_step_video_token_cap);
  if (clip.total_visual_tokens != before) {
    log(TranscriptKind::kStepTrimmed, clip.clip_index, std::nullopt,
        {{"dropped_frames", dropped},
         {"visual_tokens", clip.total_visual_tokens}});
  }
  return clip;
}

void Session::issue_thought(Clip clip, std::vector<Action>& actions) {
  ++thoughts_emitted_;
  Clip step_clip = capped(std::move(clip));
  IssueGeneration issue;
  issue.generation_id = next_generation_id_++;
  issue.kind = GenerationKind::kThought;
  issue.request = render_thought_prompt(memory_, step_clip);
  issue.clip_index = step_clip.clip_index;
  log(TranscriptKind::kThoughtStarted, step_clip.clip_index, std::nullopt,
      {{"visual_tokens", step_clip.total_visual_tokens},
       {"memory_entries", memory_.entries.size()}});
  in_flight_ = InFlight{issue.generation_id, GenerationKind::kThought,
                        std::move(step_clip), std::nullopt, clock_};
  actions.emplace_back(std::move(issue));
}

void Session::issue_answer(PendingQuery pending, std::vector<Action>& actions) {
  Clip step_clip = capped(std::move(pending.final_clip));
  IssueGeneration issue;
  issue.generation_id = next_generation_id_++;
  issue.kind = GenerationKind::kAnswer;
  issue.request = render_answer_prompt(memory_, step_clip, pending.query);
  issue.clip_index = step_clip.clip_index;
  issue.query_index = pending.query_index;
  log(TranscriptKind::kAnswerStarted, step_clip.clip_index,
      pending.query_index,
      {{"visual_tokens", step_clip.total_visual_tokens},
       {"memory_entries", memory_.entries.size()}});
  in_flight_ = InFlight{issue.generation_id, GenerationKind::kAnswer,
                        std::move(step_clip), pending.query_index, clock_};
  actions.emplace_back(std::move(issue));
}

void Session::on_completed(const GenerationCompleted& event,
                           std::vector<Action>& actions) {
  if (!in_flight_ || in_flight_->generation_id != event.generation_id) {
    throw ProtocolError("completion for generation " +
                        std::to_string(event.generation_id) +
                        " which is not in flight");
  }
  InFlight done = std::move(*in_flight_);
  in_flight_.reset();
  const Millis duration = clock_ - done.issued_at;

  if (done.kind == GenerationKind::kThought) {
    ThoughtEntry entry{done.clip.clip_index, done.clip.start_time,
                       done.clip.end_time, event.result.text, duration};
    memory_ = update(memory_, std::span<const ThoughtEntry>(&entry, 1));
    log(TranscriptKind::kThoughtCompleted, done.clip.clip_index, std::nullopt,
        {{"duration_ms", duration.count()},
         {"tokens", event.result.token_count},
         {"text", event.result.text}});
  } else {
    const int q = *done.query_index;
    AnswerRecord answer;
    answer.text = event.result.text;
    answer.boxed_answer = extract_boxed(answer.text);
    answer.answer_start_time = done.issued_at;
    answer.answer_end_time = clock_;
    const auto& query = queries_.at(static_cast<std::size_t>(q));
    log(TranscriptKind::kAnswerCompleted, done.clip.clip_index, q,
        {{"duration_ms", duration.count()},
         {"latency_ms", (clock_ - query.query_time).count()},
         {"text", answer.text},
         {"boxed", answer.boxed_answer ? json(*answer.boxed_answer)
                                       : json(nullptr)}});
    actions.emplace_back(AnswerReady{q, std::move(answer)});
  }
  dispatch_next(actions);
}

void Session::on_failed(const GenerationFailed& event,
                        std::vector<Action>& actions) {
  if (!in_flight_ || in_flight_->generation_id != event.generation_id) {
    throw ProtocolError("failure for generation " +
                        std::to_string(event.generation_id) +
                        " which is not in flight");
  }
  InFlight done = std::move(*in_flight_);
  in_flight_.reset();
  const bool answer = done.kind == GenerationKind::kAnswer;
  log(TranscriptKind::kGenerationFailed, done.clip.clip_index,
      done.query_index,
      {{"kind", answer ? "answer" : "thought"}, {"message", event.message}});
  if (answer) actions.emplace_back(AnswerFailed{*done.query_index, event.message});
  dispatch_next(actions);
}

void Session::dispatch_next(std::vector<Action>& actions) {
  if (in_flight_) return;
  if (!pending_answers_.empty()) {
    auto next = std::move(pending_answers_.front());
    pending_answers_.pop_front();
    issue_answer(std::move(next), actions);
    return;
  }
  if (blocked_clip_) {
    Clip clip = std::move(*blocked_clip_);
    blocked_clip_.reset();
    issue_thought(std::move(clip), actions);
    replay_stalled(actions);
    return;
  }
  if (!deferred_.empty()) {
    Clip clip = std::move(deferred_.front());
    deferred_.pop_front();
    issue_thought(std::move(clip), actions);
  }
}

void Session::replay_stalled(std::vector<Action>& actions) {
  while (!stalled_.empty() && !blocked_clip_) {
    Stalled item = std::move(stalled_.front());
    stalled_.pop_front();
    if (auto* frame = std::get_if<FrameRecord>(&item)) {
      on_frame(*frame, actions);
    } else {
      process_query(std::get<int>(item), actions);
    }
  }
}

// ---------------------------------------------------------------------------
// Virtual driver

namespace {

constexpr int kCompletionPriority = 0;
constexpr int kFramePriority = 1;
constexpr int kQueryPriority = 2;

}  // namespace

bool VirtualDriver::Later::operator()(const Queued& a, const Queued& b) const {
  if (a.at != b.at) return a.at > b.at;
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.order > b.order;
}

VirtualDriver::VirtualDriver(SessionConfig config, Backend& backend,
                             bool abort_on_backend_error)
    : session_(std::move(config)),
      backend_(backend),
      abort_on_backend_error_(abort_on_backend_error) {}

void VirtualDriver::push(Event event, int priority) {
  const Millis at = event_time(event);
  heap_.push_back(Queued{at, priority, order_++, std::move(event)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

void VirtualDriver::add_frames(std::span<const FrameRecord> frames) {
  for (const auto& frame : frames) {
    push(FrameArrived{frame.timestamp, frame}, kFramePriority);
  }
}

void VirtualDriver::schedule_query(QueryEvent query) {
  const Millis at = query.query_time;
  push(QueryArrived{at, std::move(query)}, kQueryPriority);
  ++scheduled_queries_;
  answers_.resize(static_cast<std::size_t>(scheduled_queries_));
  resolved_.resize(static_cast<std::size_t>(scheduled_queries_), false);
}

bool VirtualDriver::pending_queries() const {
  return std::find(resolved_.begin(), resolved_.end(), false) !=
         resolved_.end();
}

bool VirtualDriver::pop_one(std::optional<Millis> until) {
  if (heap_.empty()) return false;
  if (until && heap_.front().at > *until) return false;
  std::pop_heap(heap_.begin(), heap_.end(), Later{});
  Queued next = std::move(heap_.back());
  heap_.pop_back();
  perform(session_.step(next.event));
  return true;
}

void VirtualDriver::perform(std::vector<Action> actions) {
  for (auto& action : actions) {
    std::visit(
        Overloaded{
            [&](IssueGeneration& issue) {
              const Millis now = session_.clock();
              GenerationResult result;
              try {
                result = backend_.generate(issue.request, now);
              } catch (const BackendError& e) {
                backend_errors_.emplace_back(e.what());
                perform(session_.step(
                    GenerationFailed{now, issue.generation_id, e.what()}));
                if (abort_on_backend_error_) {
                  throw SessionAborted(e.what(), session_.transcript());
                }
                return;
              }
              const Millis done = std::max(result.completed_at, now);
              push(GenerationCompleted{done, issue.generation_id,
                                       std::move(result)},
                   kCompletionPriority);
            },
            [&](AnswerReady& ready) {
              const auto i = static_cast<std::size_t>(ready.query_index);
              if (i < answers_.size()) {
                answers_[i] = std::move(ready.answer);
                resolved_[i] = true;
              }
            },
            [&](AnswerFailed& failed) {
              const auto i = static_cast<std::size_t>(failed.query_index);
              failures_.emplace_back(failed.query_index, failed.message);
              if (i < resolved_.size()) resolved_[i] = true;
            },
        },
        action);
  }
}

void VirtualDriver::run_until(Millis until) {
  while (pop_one(until)) {
  }
  if (session_.clock() < until) {
    perform(session_.step(Tick{until}));
  }
}

void VirtualDriver::run_until_answered() {
  while (pending_queries()) {
    if (!pop_one(std::nullopt)) {
      throw RuntimeFailure("event queue drained with queries unanswered");
    }
  }
}

// ---------------------------------------------------------------------------
// Real-time driver

namespace {

class EventQueue {
 public:
  void push(Event event) {
    {
      std::lock_guard lock(mu_);
      events_.push_back(std::move(event));
    }
    cv_.notify_one();
  }
  Event pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !events_.empty(); });
    Event e = std::move(events_.front());
    events_.pop_front();
    return e;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> events_;
};

class StreamClock {
 public:
  explicit StreamClock(double speed)
      : start_(std::chrono::steady_clock::now()), speed_(speed) {}
  Millis now() const {
    const auto wall = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - start_);
    return Millis(static_cast<std::int64_t>(wall.count() * speed_));
  }
  std::chrono::steady_clock::time_point wall_at(Millis stream) const {
    return start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double, std::milli>(
                            static_cast<double>(stream.count()) / speed_));
  }

 private:
  std::chrono::steady_clock::time_point start_;
  double speed_;
};

// Interruptible sleeps shared by the producer and the worker.
class StopFlag {
 public:
  bool wait_until(std::chrono::steady_clock::time_point when) {
    std::unique_lock lock(mu_);
    return cv_.wait_until(lock, when, [&] { return stopped_; });
  }
  void stop() {
    {
      std::lock_guard lock(mu_);
      stopped_ = true;
    }
    cv_.notify_all();
  }
  bool stopped() {
    std::lock_guard lock(mu_);
    return stopped_;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopped_ = false;
};

class GenerationWorker {
 public:
  GenerationWorker(Backend& backend, const StreamClock& clock, StopFlag& stop,
                   EventQueue& out)
      : backend_(backend), clock_(clock), stop_(stop), out_(out),
        thread_([this] { loop(); }) {}
  ~GenerationWorker() {
    {
      std::lock_guard lock(mu_);
      done_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
  void submit(IssueGeneration issue) {
    {
      std::lock_guard lock(mu_);
      jobs_.push_back(std::move(issue));
    }
    cv_.notify_one();
  }

 private:
  void loop() {
    for (;;) {
      IssueGeneration job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return done_ || !jobs_.empty(); });
        if (done_) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      const Millis issued = clock_.now();
      try {
        auto result = backend_.generate(job.request, issued);
        // Modeled backends report a completion instant; honor it in wall time.
        if (stop_.wait_until(clock_.wall_at(result.completed_at))) return;
        out_.push(GenerationCompleted{clock_.now(), job.generation_id,
                                      std::move(result)});
      } catch (const BackendError& e) {
        out_.push(GenerationFailed{clock_.now(), job.generation_id, e.what()});
      }
    }
  }

  Backend& backend_;
  const StreamClock& clock_;
  StopFlag& stop_;
  EventQueue& out_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<IssueGeneration> jobs_;
  bool done_ = false;
  std::thread thread_;
};

SessionResult run_realtime(const SessionConfig& config,
                           std::span<const FrameRecord> frames,
                           std::span<const QueryEvent> queries,
                           Backend& backend, RealTimeOptions options) {
  if (!(options.speed > 0.0)) {
    throw ParameterError("real-time speed must be positive");
  }
  // Arrival schedule: frames before queries at equal instants.
  std::vector<Event> schedule;
  for (const auto& f : frames) schedule.emplace_back(FrameArrived{f.timestamp, f});
  for (const auto& q : queries) schedule.emplace_back(QueryArrived{q.query_time, q});
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const Event& a, const Event& b) {
                     return event_time(a) < event_time(b);
                   });

  Session session(config);
  StreamClock clock(options.speed);
  StopFlag stop;
  EventQueue queue;
  SessionResult result;
  result.answers.resize(queries.size());
  std::size_t resolved = 0;
  std::optional<std::string> failure;

  std::thread producer([&] {
    for (auto& event : schedule) {
      if (stop.wait_until(clock.wall_at(event_time(event)))) return;
      queue.push(std::move(event));
    }
  });
  {
    GenerationWorker worker(backend, clock, stop, queue);
    try {
      while (resolved < queries.size() && !failure) {
        Event event = queue.pop();
        // Restamp on the session clock; arrival is when the loop sees it.
        const Millis at = std::max({session.clock(), clock.now(),
                                    event_time(event)});
        std::visit([&](auto& e) { e.at = at; }, event);
        for (auto& action : session.step(event)) {
          if (auto* issue = std::get_if<IssueGeneration>(&action)) {
            worker.submit(std::move(*issue));
          } else if (auto* ready = std::get_if<AnswerReady>(&action)) {
            result.answers.at(static_cast<std::size_t>(ready->query_index)) =
                std::move(ready->answer);
            ++resolved;
          } else if (auto* failed = std::get_if<AnswerFailed>(&action)) {
            ++resolved;
            failure = failed->message;
          }
        }
        if (std::holds_alternative<GenerationFailed>(event)) {
          failure = std::get<GenerationFailed>(event).message;
        }
      }
    } catch (...) {
      stop.stop();
      producer.join();
      throw;
    }
    stop.stop();
  }
  producer.join();
  if (failure) throw SessionAborted(*failure, session.transcript());
  result.transcript = session.transcript();
  return result;
}

}  // namespace

SessionResult run_session(const SessionConfig& config,
                          std::span<const FrameRecord> frames,
                          std::span<const QueryEvent> queries,
                          Backend& backend, RealTimeOptions realtime) {
  if (queries.empty()) throw ParameterError("a session needs at least one query");
  if (config.mode == ClockMode::kRealTime) {
    return run_realtime(config, frames, queries, backend, realtime);
  }
  VirtualDriver driver(config, backend, /*abort_on_backend_error=*/true);
  driver.add_frames(frames);
  for (const auto& q : queries) driver.schedule_query(q);
  driver.run_until_answered();
  SessionResult result;
  result.transcript = driver.session().transcript();
  result.answers = driver.answers();
  return result;
}

// ---------------------------------------------------------------------------
// Latency

QaLatencyReport measure_latency(const SessionTranscript& transcript,
                                int query_index) {
  std::optional<Millis> asked;
  std::optional<Millis> answered;
  for (const auto& e : transcript) {
    if (e.query_index != query_index) continue;
    if (e.kind == TranscriptKind::kQueryArrived) {
      asked = e.detail.contains("query_time_ms")
                  ? Millis(e.detail["query_time_ms"].get<std::int64_t>())
                  : e.at;
    }
    if (e.kind == TranscriptKind::kAnswerCompleted) answered = e.at;
  }
  if (!asked || !answered) {
    throw MeasurementError("transcript lacks QueryArrived/AnswerCompleted for "
                           "query " + std::to_string(query_index));
  }

  QaLatencyReport report;
  report.qa_latency = *answered - *asked;
  std::map<int, Millis> started;
  for (const auto& e : transcript) {
    if (e.at > *answered) break;
    if (e.kind == TranscriptKind::kThoughtStarted && e.clip_index) {
      started[*e.clip_index] = e.at;
    } else if (e.kind == TranscriptKind::kThoughtCompleted && e.clip_index) {
      auto it = started.find(*e.clip_index);
      if (it == started.end() || it->second >= *asked) continue;
      report.thinking_time_total += e.at - it->second;
      report.thinking_time_overlapped += std::min(e.at, *asked) - it->second;
      ++report.thoughts;
    } else if (e.kind == TranscriptKind::kDeadlineMissed) {
      ++report.deadline_misses;
    }
  }
  return report;
}

}  // namespace vst
