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

#include "test_support.h"
#include "vst/kg_synthesis.h"

namespace vst::kg {
namespace {

SceneClip scene(int id, std::string description = "") {
  return SceneClip{id, {Millis(1000LL * (id - 1)), Millis(1000LL * id)},
                   std::move(description)};
}

EntityTriple triple(std::string h, std::string r, std::string t, int clip) {
  const auto s = scene(clip);
  return EntityTriple{std::move(h), std::move(r), std::move(t), s.span, "", clip};
}

// a -> b -> c -> ... over consecutive clips.
EntityBank linear_bank(const std::vector<std::string>& names) {
  auto bank = make_entity_bank(3);
  for (std::size_t i = 0; i + 1 < names.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const std::vector<EntityTriple> t{triple(names[i], "then", names[i + 1], id)};
    bank = update_entity_bank(bank, scene(id), t, 3);
  }
  return bank;
}

SynthesizedQA clean_qa() {
  return SynthesizedQA{"How does a lead to c?",
                       {"During 0.0-1.0s, a then b.", "During 1.0-2.0s, b then c."},
                       "c",
                       "multi_hop",
                       1};
}

TEST(KgBank, FormatsAndNormalizes) {
  EXPECT_EQ(format_interval({Millis(12000), Millis(18500)}), "12.0-18.5s");
  EXPECT_EQ(normalize_name("  red \t  car "), "red car");
}

TEST(KgBank, WindowSlidesAndOrderIsChecked) {
  auto bank = make_entity_bank(2);
  for (int id = 1; id <= 4; ++id) {
    bank = update_entity_bank(bank, scene(id), {}, 2);
    EXPECT_EQ(bank.window.size(), std::min<std::size_t>(id, 2));
    EXPECT_EQ(bank.window_ids().back(), id);
  }
  EXPECT_EQ(bank.window_ids(), (std::vector<int>{3, 4}));
  EXPECT_THROW(update_entity_bank(bank, scene(4), {}, 2), DomainError);
  auto overlapping = scene(5);
  overlapping.span.start = Millis(3500);
  EXPECT_THROW(update_entity_bank(bank, overlapping, {}, 2), DomainError);
}

TEST(KgBank, RejectsEmptyEntitiesAndDeduplicates) {
  auto bank = make_entity_bank(3);
  const std::vector<EntityTriple> bad{triple("a", "r", "b", 1),
                                      triple(" ", "r", "b", 1)};
  try {
    update_entity_bank(bank, scene(1), bad, 3);
    FAIL();
  } catch (const ExtractionError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  const std::vector<EntityTriple> dup{triple("a", "r", "b", 1),
                                      triple(" a ", "r", "b", 1)};
  bank = update_entity_bank(bank, scene(1), dup, 3);
  EXPECT_EQ(bank.triples.size(), 1u);
  EXPECT_EQ(bank.entities.size(), 2u);
}

TEST(KgBank, EntitySightingsSpanFirstToLast) {
  auto bank = make_entity_bank(3);
  bank = update_entity_bank(bank, scene(1), std::vector{triple("a", "r", "b", 1)}, 3);
  bank = update_entity_bank(bank, scene(2), std::vector{triple("b", "r", "c", 2)}, 3);
  EXPECT_EQ(bank.entities.at("b").first_seen, Millis(0));
  EXPECT_EQ(bank.entities.at("b").last_seen, Millis(2000));
}

TEST(KgRefine, MergesChainsAndRemoves) {
  auto bank = linear_bank({"the man", "cup", "subtitle one", "table"});
  const auto out = apply_refinement(
      bank, nlohmann::json{{"merge", {{"the man", "man"}}},
                           {"remove", {"subtitle one"}}});
  EXPECT_EQ(out.merged, 1u);
  EXPECT_EQ(out.removed, 1u);
  EXPECT_EQ(out.dropped_triples, 2u);
  ASSERT_EQ(out.bank.triples.size(), 1u);
  EXPECT_EQ(out.bank.triples[0].head, "man");
  EXPECT_FALSE(out.bank.entities.count("the man"));
}

TEST(KgRefine, MockBackendProposalAndFailureFallback) {
  auto bank = linear_bank({"the man", "cup"});
  MockKgBackend mock;
  const auto out = refine_bank(bank, mock);
  EXPECT_TRUE(out.bank.entities.count("man"));
  ReplayBackend broken(std::vector<ReplayRecord>{});
  const auto kept = refine_bank(bank, broken);
  EXPECT_EQ(kept.bank.triples.size(), bank.triples.size());
  EXPECT_EQ(kept.warnings.size(), 1u);
}

TEST(KgGraph, LinearGraphAndSelfLoops) {
  auto bank = linear_bank({"a", "b", "c", "d"});
  bank = update_entity_bank(bank, scene(4), std::vector{triple("d", "is", "d", 4)}, 3);
  const auto g = build_graph(bank);
  EXPECT_EQ(g.nodes.size(), 4u);
  EXPECT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.nodes[0].name, "a");
  ASSERT_TRUE(g.find("c"));
  EXPECT_FALSE(g.find("z"));
}

TEST(KgChains, OverlapExamples) {
  EXPECT_DOUBLE_EQ(chain_overlap({"a", "b", "c"}, {"c", "d", "e"}), 1.0 / 3.0);
  std::set<std::string> a, b;
  for (int i = 0; i < 12; ++i) {
    a.insert("a" + std::to_string(i));
    b.insert("b" + std::to_string(i));
  }
  b.erase("b0");
  b.insert("a0");
  EXPECT_DOUBLE_EQ(chain_overlap(a, b), 1.0 / 12.0);
  EXPECT_THROW(chain_overlap({}, a), DomainError);
}

TEST(KgChains, SamplesTheOnlyPathOfALine) {
  const auto g = build_graph(linear_bank({"a", "b", "c", "d"}));
  ChainSamplingOptions o;
  o.count = 1;
  o.min_hops = 3;
  const auto s = sample_chains(g, o);
  ASSERT_EQ(s.chains.size(), 1u);
  EXPECT_EQ(s.chains[0].hops(), 3u);
  EXPECT_TRUE(is_simple_path(g, s.chains[0]));
  EXPECT_TRUE(s.diagnostic.empty());
  o.count = 2;
  const auto short_of = sample_chains(g, o);
  EXPECT_EQ(short_of.chains.size(), 1u);
  EXPECT_FALSE(short_of.diagnostic.empty());
}

TEST(KgChains, ReproducibleForASeed) {
  const auto trace = testing::synthetic_kg_trace(30, 16, 5);
  auto bank = make_entity_bank(3);
  for (const auto& s : trace.scenes) {
    bank = update_entity_bank(bank, s,
                              triples_from_events(trace.extractions.at(s.clip_id), s),
                              3);
  }
  const auto g = build_graph(bank);
  ChainSamplingOptions o;
  o.count = 6;
  o.seed = 11;
  const auto a = sample_chains(g, o);
  const auto b = sample_chains(g, o);
  ASSERT_EQ(a.chains.size(), b.chains.size());
  for (std::size_t i = 0; i < a.chains.size(); ++i) {
    EXPECT_EQ(a.chains[i].edges, b.chains[i].edges);
  }
}

TEST(KgQa, ParseRejectsBadReplies) {
  const auto g = build_graph(linear_bank({"a", "b", "c"}));
  EvidenceChain chain{1, {0, 1}, {0, 1, 2}};
  EXPECT_THROW(parse_qa_response("not json", g, chain), SynthesisError);
  EXPECT_THROW(parse_qa_response(R"({"question": "q"})", g, chain), SynthesisError);
  try {
    parse_qa_response(
        R"({"question":"q","cot":["no time here"],"answer":"c","reasoning_type":"x"})",
        g, chain);
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_NE(e.raw().find("no time here"), std::string::npos);
  }
  const auto qa = parse_qa_response(
      R"(```json
{"question":"q","cot":"During 0.0-1.0s x.\nDuring 1.0-2.0s y.","answer":"c","reasoning_type":"x"}
```)",
      g, chain);
  EXPECT_EQ(qa.cot.size(), 2u);
}

TEST(KgQa, MockSynthesisCitesEveryEdge) {
  const auto g = build_graph(linear_bank({"a", "b", "c", "d"}));
  EvidenceChain chain{7, {0, 1, 2}, {0, 1, 2, 3}};
  MockKgBackend mock;
  const auto qa = synthesize_qa(chain, g, mock);
  EXPECT_EQ(qa.answer, "d");
  EXPECT_EQ(qa.cot.size(), 3u);
  EXPECT_EQ(qa.chain_id, 7);
  EXPECT_EQ(filter_qa(qa, mock).decision, Decision::kAccept);
}

TEST(KgFilter, CleanFixtureAccepted) {
  MockKgBackend mock;
  const auto r = filter_qa(clean_qa(), mock);
  EXPECT_EQ(r.decision, Decision::kAccept);
  ASSERT_EQ(r.checks.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.checks[i].name, kCheckNames[i]);
}

TEST(KgFilter, BannedTokensAndRepetitionRejected) {
  MockKgBackend mock;
  auto banned = clean_qa();
  banned.cot[0] = "Step one: during 0.0-1.0s, a then b.";
  EXPECT_EQ(filter_qa(banned, mock).decision, Decision::kReject);
  auto substring = clean_qa();
  substring.cot[0] = "Footsteps during 0.0-1.0s.";
  EXPECT_EQ(check_format_alignment(substring).verdict, Verdict::kPass);
  auto repeated = clean_qa();
  repeated.cot[1] = repeated.cot[0];
  EXPECT_EQ(check_repetition(repeated).verdict, Verdict::kFail);
  EXPECT_EQ(filter_qa(repeated, mock).decision, Decision::kReject);
  auto missing = clean_qa();
  missing.answer = " ";
  EXPECT_EQ(check_format_alignment(missing).verdict, Verdict::kFail);
}

TEST(KgFilter, DelegatedFailureRejectsAndGarbageQuarantines) {
  MockKgBackend failing({"world_knowledge"});
  EXPECT_EQ(filter_qa(clean_qa(), failing).decision, Decision::kReject);
  ReplayBackend garbage(std::vector<ReplayRecord>{{"", 0, "hmm", Millis(0)},
                                                  {"", 1, "{}", Millis(0)},
                                                  {"", 2, "{}", Millis(0)}});
  const auto r = filter_qa(clean_qa(), garbage);
  EXPECT_EQ(r.decision, Decision::kQuarantine);
  EXPECT_EQ(r.checks[0].verdict, Verdict::kIndeterminate);
}

TEST(KgExtract, MockSplitsDescriptions) {
  MockKgBackend mock;
  const auto bank = make_entity_bank(3);
  const auto t = extract_triples(
      bank, scene(1, "the man picks up a cup; a dog chases the cat."), mock);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].head, "the man");
  EXPECT_EQ(t[0].relation, "picks up");
  EXPECT_EQ(t[0].tail, "a cup");
  EXPECT_EQ(t[1].tail, "the cat");
  EXPECT_EQ(t[1].span.end, Millis(1000));
}

TEST(KgPipeline, FixtureFilesEndToEnd) {
  const auto scenes = load_scenes(testing::data_path("scenes.jsonl"));
  const auto extractions =
      load_extraction_trace(testing::data_path("extractions.jsonl"));
  MockKgBackend mock;
  PipelineOptions o;
  o.chains.count = 1;
  o.chains.min_hops = 2;
  const auto r = run_pipeline(scenes, extractions, mock, o);
  EXPECT_FALSE(r.graph.nodes.empty());
  EXPECT_EQ(r.accepted.size(), 1u);
  const auto dir = testing::scratch_dir("kg_pipeline");
  write_pipeline_outputs(dir, r);
  for (const char* f : {"graph.json", "chains.jsonl", "qa.jsonl", "rubric.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
}

}  // namespace
}  // namespace vst::kg
