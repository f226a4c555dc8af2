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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vst/errors.h"
#include "vst/memory.h"
#include "vst/prompts.h"
#include "vst/stream_model.h"

namespace vst {

class TraceExhaustedError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TransportError : public BackendError {
 public:
  TransportError(int status, const std::string& what)
      : BackendError(what), status_(status) {}
  // HTTP status, or 0 when no response arrived.
  int status() const { return status_; }

 private:
  int status_;
};

enum class Purpose {
  kThought,
  kAnswer,
  kEntityExtraction,
  kBankRefinement,
  kQaSynthesis,
  kRubricCheck,
};

std::string_view to_string(Purpose purpose);

// Side information for deterministic backends. Never sent over the wire.
struct RequestContext {
  Purpose purpose = Purpose::kThought;
  int clip_index = 0;
  std::int64_t visual_tokens = 0;
  std::vector<std::string> captions;
  std::string memory_text;
  std::optional<std::string> gold_answer;
  nlohmann::json payload;
};

struct GenerationRequest {
  std::string rendered_prompt;
  std::vector<Message> messages;
  int max_new_tokens = 512;
  std::optional<Millis> deadline;
  RequestContext context;
};

struct GenerationResult {
  std::string text;
  Millis issued_at{0};
  Millis completed_at{0};
  std::int64_t token_count = 1;
  bool deadline_missed = false;

  Millis duration() const { return completed_at - issued_at; }
};

GenerationRequest render_thought_prompt(const MemoryState& memory,
                                        const Clip& clip);
GenerationRequest render_answer_prompt(const MemoryState& memory,
                                       const Clip& clip,
                                       const QueryEvent& query);

// Whitespace-delimited words, at least 1.
std::int64_t count_tokens(std::string_view text);

// Text generation behind one interface. `issued_at` is the session clock at
// issue; implementations report completion on the same clock.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResult generate(const GenerationRequest& request,
                                    Millis issued_at) = 0;
  virtual std::string_view name() const = 0;
};

struct MockSummarizerOptions {
  double tokens_per_second = 20.0;
  Millis prefill{0};
  // Truncates thoughts to this many characters; 0 disables truncation.
  std::size_t max_thought_chars = 0;
  std::string fallback_answer = "The video does not show it. \\boxed{unknown}";
};

// Deterministic: thoughts concatenate the clip's captions, answers box the
// gold answer when it appears (as a whole word) in the captions or memory.
class MockSummarizer : public Backend {
 public:
  explicit MockSummarizer(MockSummarizerOptions options = {});
  GenerationResult generate(const GenerationRequest& request,
                            Millis issued_at) override;
  std::string_view name() const override { return "mock"; }

  std::string thought_text(const RequestContext& context) const;
  std::string answer_text(const RequestContext& context) const;

 private:
  MockSummarizerOptions options_;
};

struct ReplayRecord {
  std::string session;
  int call_index = 0;
  std::string text;
  Millis duration{0};
};

ReplayRecord replay_record_from_json(const nlohmann::json& j);

// Serves recorded outputs keyed by (session, call index), in call order.
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::vector<ReplayRecord> records, std::string session = "");
  static std::vector<ReplayRecord> load_trace(
      const std::filesystem::path& path);

  GenerationResult generate(const GenerationRequest& request,
                            Millis issued_at) override;
  std::string_view name() const override { return "replay"; }

 private:
  std::mutex mu_;
  std::map<std::pair<std::string, int>, ReplayRecord> records_;
  std::string session_;
  int next_call_ = 0;
};

struct HttpChatOptions {
  std::string endpoint;  // scheme://host[:port][/prefix]
  std::string model = "vst";
  std::optional<std::string> bearer_token;
  int timeout_seconds = 120;
};

// Environment override for the configured endpoint.
inline constexpr const char* kBackendUrlEnv = "VST_BACKEND_URL";
std::string resolve_endpoint(const std::string& configured);

// The request body posted to {endpoint}/v1/chat/completions.
nlohmann::json chat_request_body(const GenerationRequest& request,
                                 const std::string& model);
// choices[0].message.content; throws TransportError on a malformed body.
std::string chat_response_content(const nlohmann::json& body);

// OpenAI-compatible chat client. Each call opens its own connection, so a
// single instance may serve concurrent sessions.
class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(HttpChatOptions options);
  GenerationResult generate(const GenerationRequest& request,
                            Millis issued_at) override;
  std::string_view name() const override { return "http"; }

 private:
  HttpChatOptions options_;
  std::string host_;
  std::string path_prefix_;
};

struct BackendConfig {
  std::string kind = "mock";  // mock | replay | http
  std::string url;
  std::string model = "vst";
  std::string trace;
  double tokens_per_second = 20.0;
  std::optional<std::string> bearer_token;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace vst
