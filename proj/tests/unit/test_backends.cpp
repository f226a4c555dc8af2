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

#include <cstdlib>

#include "stub_chat_server.h"
#include "test_support.h"
#include "vst/backends.h"
#include "vst/prompts.h"

namespace vst {
namespace {

Clip captioned_clip() {
  return make_clip(2, {FrameRecord{4, Millis(2000), 8, "a red car"},
                       FrameRecord{5, Millis(2500), 8, "a dog"}});
}

TEST(Prompts, ThoughtPromptLayout) {
  const auto p = thought_prompt(make_memory(4, 100), captioned_clip());
  EXPECT_EQ(p.rendered,
            "[System]\nYou are a Streaming Video Analyst.\n[Memory: empty]\n"
            "Time 2.0-2.5s <clip 2: 16 visual tokens> [captions: a red car | "
            "a dog]");
  ASSERT_EQ(p.messages.size(), 2u);
  EXPECT_EQ(p.messages[0].role, Role::kSystem);
}

TEST(Prompts, AnswerPromptEndsWithCue) {
  const QueryEvent q{Millis(3000), "What color is the car?", std::nullopt};
  const auto p = answer_prompt(make_memory(4, 100), captioned_clip(), q);
  EXPECT_NE(p.rendered.find("Time 3.0s " + std::string(kAnswerInstruction)),
            std::string::npos);
  EXPECT_NE(p.rendered.find(kBoxedInstruction), std::string::npos);
  EXPECT_TRUE(p.rendered.ends_with("Your answer:"));
}

TEST(Prompts, ExtractBoxed) {
  EXPECT_EQ(extract_boxed("x \\boxed{A} y \\boxed{B}"), "B");
  EXPECT_EQ(extract_boxed("\\boxed{\\frac{1}{2}}"), "\\frac{1}{2}");
  EXPECT_EQ(extract_boxed("\\boxed{A} \\boxed{open"), "A");
  EXPECT_FALSE(extract_boxed("none").has_value());
  EXPECT_EQ(inject_boxed("3"), "\\boxed{3}");
}

TEST(MockSummarizer, ThoughtsJoinCaptionsAndTimeByRate) {
  MockSummarizer mock(MockSummarizerOptions{10.0, Millis(5), 0, "no"});
  const auto req = render_thought_prompt(make_memory(4, 100), captioned_clip());
  const auto r = mock.generate(req, Millis(1000));
  EXPECT_EQ(r.text, "a red car a dog");
  EXPECT_EQ(r.token_count, 5);
  EXPECT_EQ(r.completed_at, Millis(1000 + 5 + 500));
}

TEST(MockSummarizer, AnswerBoxesGoldOnlyWhenSeen) {
  MockSummarizer mock;
  QueryEvent q{Millis(3000), "Which animal?", std::string("dog")};
  auto r = mock.generate(
      render_answer_prompt(make_memory(4, 100), captioned_clip(), q), Millis(0));
  EXPECT_EQ(r.text, "The answer is \\boxed{dog}.");
  q.gold_answer = "cat";
  r = mock.generate(
      render_answer_prompt(make_memory(4, 100), captioned_clip(), q), Millis(0));
  EXPECT_EQ(r.text, MockSummarizerOptions{}.fallback_answer);
}

TEST(ReplayBackend, ServesInCallOrderThenExhausts) {
  ReplayBackend replay(ReplayBackend::load_trace(
      testing::data_path("replay_trace.jsonl")));
  GenerationRequest req;
  const auto first = replay.generate(req, Millis(100));
  EXPECT_EQ(first.text, "A person walks in.");
  EXPECT_EQ(first.completed_at, Millis(100 + 400));
  replay.generate(req, Millis(0));
  replay.generate(req, Millis(0));
  EXPECT_THROW(replay.generate(req, Millis(0)), TraceExhaustedError);
}

TEST(ReplayBackend, RejectsDuplicateCalls) {
  std::vector<ReplayRecord> r{{"", 0, "a", Millis(1)}, {"", 0, "b", Millis(1)}};
  EXPECT_THROW(ReplayBackend backend(r), ParseError);
}

TEST(HttpChat, RequestBodyKeys) {
  GenerationRequest req = render_thought_prompt(make_memory(4, 100),
                                                captioned_clip());
  req.max_new_tokens = 64;
  const auto body = chat_request_body(req, "m");
  EXPECT_EQ(testing::keys_of(body),
            (std::vector<std::string>{"max_tokens", "messages", "model"}));
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["role"], "user");
  EXPECT_EQ(body["max_tokens"], 64);
}

TEST(HttpChat, RoundTripAgainstStub) {
  testing::StubChatServer stub("A dog runs. \\boxed{B}");
  HttpChatBackend backend({stub.endpoint() + "/", "vst-test", "tok", 5});
  const QueryEvent q{Millis(3000), "Which?", std::nullopt};
  const auto req = render_answer_prompt(make_memory(4, 100), captioned_clip(), q);
  const auto r = backend.generate(req, Millis(50));
  EXPECT_EQ(r.text, "A dog runs. \\boxed{B}");
  EXPECT_EQ(r.token_count, 7);
  EXPECT_GE(r.completed_at, Millis(50));
  const auto seen = stub.requests();
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].path, "/v1/chat/completions");
  EXPECT_EQ(seen[0].authorization, "Bearer tok");
  const auto body = nlohmann::json::parse(seen[0].body);
  EXPECT_EQ(body, chat_request_body(req, "vst-test"));
}

TEST(HttpChat, ErrorStatuses) {
  testing::StubChatServer stub("unused");
  HttpChatBackend backend({stub.endpoint(), "m", std::nullopt, 5});
  GenerationRequest req;
  stub.respond_with(503, "busy");
  try {
    backend.generate(req, Millis(0));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  stub.respond_with(200, R"({"choices": []})");
  try {
    backend.generate(req, Millis(0));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 200);
  }
}

TEST(HttpChat, UnreachableEndpointIsStatusZero) {
  HttpChatBackend backend({"http://127.0.0.1:1", "m", std::nullopt, 1});
  try {
    backend.generate(GenerationRequest{}, Millis(0));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 0);
  }
}

TEST(HttpChat, EndpointValidationAndEnvOverride) {
  EXPECT_THROW(HttpChatBackend({"", "m", std::nullopt, 1}), ParameterError);
  EXPECT_THROW(HttpChatBackend({"https://x", "m", std::nullopt, 1}),
               ParameterError);
  ::setenv(kBackendUrlEnv, "http://override:9", 1);
  EXPECT_EQ(resolve_endpoint("http://configured"), "http://override:9");
  ::unsetenv(kBackendUrlEnv);
  EXPECT_EQ(resolve_endpoint("http://configured"), "http://configured");
}

TEST(Backends, Factory) {
  EXPECT_EQ(make_backend(BackendConfig{})->name(), "mock");
  BackendConfig bad;
  bad.kind = "grpc";
  EXPECT_THROW(make_backend(bad), ParameterError);
}

}  // namespace
}  // namespace vst
