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

#include "vst/backends.h"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "vst/jsonl.h"

namespace vst {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Case-insensitive whole-word containment.
bool contains_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  const std::string h = lower(haystack);
  const std::string n = lower(needle);
  std::size_t pos = 0;
  while ((pos = h.find(n, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !word_char(h[pos - 1]);
    const std::size_t end = pos + n.size();
    const bool right_ok = end == h.size() || !word_char(h[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

Millis rate_duration(std::int64_t tokens, double tokens_per_second) {
  return Millis(std::llround(static_cast<double>(tokens) * 1000.0 /
                             tokens_per_second));
}

GenerationRequest from_parts(PromptParts parts) {
  GenerationRequest request;
  request.rendered_prompt = std::move(parts.rendered);
  request.messages = std::move(parts.messages);
  return request;
}

}  // namespace

std::string_view to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::kThought:
      return "thought";
    case Purpose::kAnswer:
      return "answer";
    case Purpose::kEntityExtraction:
      return "entity_extraction";
    case Purpose::kBankRefinement:
      return "bank_refinement";
    case Purpose::kQaSynthesis:
      return "qa_synthesis";
    case Purpose::kRubricCheck:
      return "rubric_check";
  }
  return "thought";
}

GenerationRequest render_thought_prompt(const MemoryState& memory,
                                        const Clip& clip) {
  auto request = from_parts(thought_prompt(memory, clip));
  request.context.purpose = Purpose::kThought;
  request.context.clip_index = clip.clip_index;
  request.context.visual_tokens = clip.total_visual_tokens;
  request.context.captions = clip.captions();
  request.context.memory_text = render(memory);
  return request;
}

GenerationRequest render_answer_prompt(const MemoryState& memory,
                                       const Clip& clip,
                                       const QueryEvent& query) {
  auto request = from_parts(answer_prompt(memory, clip, query));
  request.context.purpose = Purpose::kAnswer;
  request.context.clip_index = clip.clip_index;
  request.context.visual_tokens = clip.total_visual_tokens;
  request.context.captions = clip.captions();
  request.context.memory_text = render(memory);
  request.context.gold_answer = query.gold_answer;
  return request;
}

std::int64_t count_tokens(std::string_view text) {
  std::int64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words > 0 ? words : 1;
}

MockSummarizer::MockSummarizer(MockSummarizerOptions options)
    : options_(std::move(options)) {
  if (!(options_.tokens_per_second > 0.0)) {
    throw ParameterError("mock tokens_per_second must be positive");
  }
}

std::string MockSummarizer::thought_text(const RequestContext& context) const {
  std::string text;
  for (const auto& caption : context.captions) {
    if (!text.empty()) text += ' ';
    text += caption;
  }
  if (text.empty()) {
    text = "No visible change in clip " + std::to_string(context.clip_index) +
           ".";
  }
  if (options_.max_thought_chars > 0 &&
      text.size() > options_.max_thought_chars) {
    text.resize(options_.max_thought_chars);
  }
  return text;
}

std::string MockSummarizer::answer_text(const RequestContext& context) const {
  if (context.gold_answer) {
    const auto& gold = *context.gold_answer;
    bool seen = contains_word(context.memory_text, gold);
    for (const auto& caption : context.captions) {
      seen = seen || contains_word(caption, gold);
    }
    if (seen) return "The answer is " + inject_boxed(gold) + ".";
  }
  return options_.fallback_answer;
}

GenerationResult MockSummarizer::generate(const GenerationRequest& request,
                                          Millis issued_at) {
  GenerationResult result;
  result.text = request.context.purpose == Purpose::kAnswer
                    ? answer_text(request.context)
                    : thought_text(request.context);
  result.token_count = count_tokens(result.text);
  result.issued_at = issued_at;
  result.completed_at = issued_at + options_.prefill +
                        rate_duration(result.token_count,
                                      options_.tokens_per_second);
  result.deadline_missed =
      request.deadline.has_value() && result.completed_at > *request.deadline;
  return result;
}

ReplayRecord replay_record_from_json(const json& j) {
  ReplayRecord r;
  r.call_index = j.at("call_index").get<int>();
  r.text = j.at("text").get<std::string>();
  r.duration = Millis(j.at("duration_ms").get<std::int64_t>());
  if (auto it = j.find("session"); it != j.end()) {
    r.session = it->get<std::string>();
  }
  return r;
}

ReplayBackend::ReplayBackend(std::vector<ReplayRecord> records,
                             std::string session)
    : session_(std::move(session)) {
  for (auto& r : records) {
    auto key = std::make_pair(r.session, r.call_index);
    if (!records_.emplace(key, std::move(r)).second) {
      throw ParseError("duplicate replay record for call " +
                       std::to_string(key.second));
    }
  }
}

std::vector<ReplayRecord> ReplayBackend::load_trace(
    const std::filesystem::path& path) {
  std::vector<ReplayRecord> records;
  for (const auto& line : read_jsonl_file(path)) {
    try {
      records.push_back(replay_record_from_json(line));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return records;
}

GenerationResult ReplayBackend::generate(const GenerationRequest& request,
                                         Millis issued_at) {
  std::lock_guard lock(mu_);
  const int call = next_call_;
  auto it = records_.find({session_, call});
  if (it == records_.end()) {
    throw TraceExhaustedError("replay trace has no record for session '" +
                              session_ + "' call " + std::to_string(call));
  }
  ++next_call_;
  GenerationResult result;
  result.text = it->second.text;
  result.token_count = count_tokens(result.text);
  result.issued_at = issued_at;
  result.completed_at = issued_at + it->second.duration;
  result.deadline_missed =
      request.deadline.has_value() && result.completed_at > *request.deadline;
  return result;
}

std::string resolve_endpoint(const std::string& configured) {
  if (const char* env = std::getenv(kBackendUrlEnv); env && *env) return env;
  return configured;
}

json chat_request_body(const GenerationRequest& request,
                       const std::string& model) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return json{{"model", model},
              {"messages", std::move(messages)},
              {"max_tokens", request.max_new_tokens}};
}

std::string chat_response_content(const json& body) {
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(200, std::string("malformed chat response: ") +
                                  e.what());
  }
}

HttpChatBackend::HttpChatBackend(HttpChatOptions options)
    : options_(std::move(options)) {
  const std::string endpoint = options_.endpoint;
  if (endpoint.empty()) throw ParameterError("http backend needs backend.url");
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ParameterError("backend.url needs a scheme: " + endpoint);
  }
  if (endpoint.substr(0, scheme_end) != "http") {
    throw ParameterError("only http:// endpoints are supported: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  host_ = endpoint.substr(0, path_start);
  if (path_start != std::string::npos) {
    path_prefix_ = endpoint.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
}

GenerationResult HttpChatBackend::generate(const GenerationRequest& request,
                                           Millis issued_at) {
  httplib::Client client(host_);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  httplib::Headers headers;
  if (options_.bearer_token) {
    headers.emplace("Authorization", "Bearer " + *options_.bearer_token);
  }

  const auto body = chat_request_body(request, options_.model).dump();
  const auto started = std::chrono::steady_clock::now();
  auto response = client.Post(path_prefix_ + "/v1/chat/completions", headers,
                              body, "application/json");
  const auto elapsed = std::chrono::duration_cast<Millis>(
      std::chrono::steady_clock::now() - started);

  if (!response) {
    throw TransportError(0, "chat request to " + host_ + " failed: " +
                                httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    throw TransportError(response->status,
                         "chat endpoint returned HTTP " +
                             std::to_string(response->status) + ": " +
                             response->body.substr(0, 200));
  }
  json parsed;
  try {
    parsed = json::parse(response->body);
  } catch (const json::parse_error& e) {
    throw TransportError(response->status,
                         std::string("chat response is not JSON: ") + e.what());
  }

  GenerationResult result;
  result.text = chat_response_content(parsed);
  result.token_count = count_tokens(result.text);
  if (auto usage = parsed.find("usage"); usage != parsed.end()) {
    if (auto ct = usage->find("completion_tokens");
        ct != usage->end() && ct->is_number_integer()) {
      result.token_count = std::max<std::int64_t>(1, ct->get<std::int64_t>());
    }
  }
  result.issued_at = issued_at;
  result.completed_at = issued_at + elapsed;
  result.deadline_missed =
      request.deadline.has_value() && result.completed_at > *request.deadline;
  return result;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "mock") {
    MockSummarizerOptions options;
    options.tokens_per_second = config.tokens_per_second;
    return std::make_unique<MockSummarizer>(options);
  }
  if (config.kind == "replay") {
    if (config.trace.empty()) {
      throw ParameterError("replay backend needs backend.trace");
    }
    return std::make_unique<ReplayBackend>(
        ReplayBackend::load_trace(config.trace));
  }
  if (config.kind == "http") {
    HttpChatOptions options;
    options.endpoint = resolve_endpoint(config.url);
    options.model = config.model;
    options.bearer_token = config.bearer_token;
    return std::make_unique<HttpChatBackend>(std::move(options));
  }
  throw ParameterError("unknown backend.kind: " + config.kind);
}

}  // namespace vst
