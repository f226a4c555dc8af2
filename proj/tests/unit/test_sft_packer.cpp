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
#include "vst/segmenter.h"
#include "vst/sft_packer.h"

namespace vst {
namespace {

using testing::Rng;

std::vector<Clip> three_clips() {
  std::vector<Clip> clips;
  for (int c = 1; c <= 3; ++c) {
    FrameRecord f{c, Millis(1000 * c), 10, std::nullopt};
    clips.push_back(make_clip(c, {f}));
  }
  return clips;
}

std::vector<ThoughtEntry> two_thoughts() {
  return {ThoughtEntry{1, Millis(1000), Millis(1000), "red car", Millis(0)},
          ThoughtEntry{2, Millis(2000), Millis(2000), "blue bus", Millis(0)}};
}

SftSequence small_sequence() {
  return build_sequence(three_clips(), two_thoughts(),
                        QueryEvent{Millis(3500), "which car?", std::nullopt},
                        "\\boxed{red}", make_memory(4, 200));
}

TEST(SftPacker, ElementOrder) {
  const auto seq = small_sequence();
  std::vector<std::string> kinds;
  for (const auto& e : seq.elements()) kinds.emplace_back(element_kind(e));
  EXPECT_EQ(kinds, (std::vector<std::string>{"initial_memory", "clip", "thought",
                                             "clip", "thought", "final_clip",
                                             "query", "answer"}));
}

TEST(SftPacker, BuildRejectsMismatchedStructure) {
  auto clips = three_clips();
  auto thoughts = two_thoughts();
  thoughts.pop_back();
  const QueryEvent q{Millis(3500), "q", std::nullopt};
  EXPECT_THROW(build_sequence(clips, thoughts, q, "a", make_memory(4, 200)),
               StructureError);
  thoughts = two_thoughts();
  thoughts[1].clip_index = 3;
  EXPECT_THROW(build_sequence(clips, thoughts, q, "a", make_memory(4, 200)),
               StructureError);
}

TEST(SftPacker, SingleSegmentWhenEverythingFits) {
  const auto segs = segment_sequence(small_sequence(), 1000,
                                     word_count_estimator(1.0));
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_TRUE(segs[0].tail.has_value());
  EXPECT_EQ(segs[0].first_cutoff, 0);
  EXPECT_EQ(segs[0].last_cutoff, 2);
}

TEST(SftPacker, SplitsAndCarriesMemory) {
  // Pairs cost 12 and the empty marker 2; cap 25 fits one pair per segment.
  const auto segs = segment_sequence(small_sequence(), 25,
                                     word_count_estimator(1.0));
  ASSERT_GE(segs.size(), 2u);
  EXPECT_EQ(segs[0].pairs.size(), 1u);
  EXPECT_TRUE(segs[0].carried_memory.entries.empty());
  ASSERT_EQ(segs[1].carried_memory.entries.size(), 1u);
  EXPECT_EQ(segs[1].carried_memory.entries[0].text, "red car");
  EXPECT_TRUE(segs.back().tail.has_value());
}

TEST(SftPacker, InfeasibleNamesTheClip) {
  try {
    segment_sequence(small_sequence(), 5, word_count_estimator(1.0));
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.clip_index(), 1);
  }
  std::string long_answer;
  for (int i = 0; i < 30; ++i) long_answer += "word ";
  const auto wordy = build_sequence(
      three_clips(), two_thoughts(),
      QueryEvent{Millis(3500), "which car?", std::nullopt}, long_answer,
      make_memory(4, 200));
  try {
    segment_sequence(wordy, 25, word_count_estimator(1.0));
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_FALSE(e.clip_index().has_value());
  }
  EXPECT_THROW(segment_sequence(small_sequence(), 0, word_count_estimator()),
               ParameterError);
}

TEST(SftPacker, WordEstimatorRoundsUp) {
  const auto est = word_count_estimator(1.3);
  EXPECT_EQ(est(""), 0);
  EXPECT_EQ(est("a"), 2);
  EXPECT_EQ(est("a b c d e f g h i j"), 13);
}

TEST(SftPacker, LossMaskSupervisesThoughtsAndAnswer) {
  const auto segs = segment_sequence(small_sequence(), 1000,
                                     word_count_estimator(1.0));
  const auto rendering = render_segment(segs[0]);
  const auto mask = loss_mask(segs[0], rendering);
  std::vector<std::string> supervised;
  for (std::size_t i = 0; i < mask.tokens.size(); ++i) {
    if (!mask.supervised[i]) continue;
    const auto& t = mask.tokens[i];
    supervised.push_back(rendering.text.substr(t.begin, t.end - t.begin));
  }
  EXPECT_EQ(supervised, (std::vector<std::string>{"red", "car", "blue", "bus",
                                                  "\\boxed{red}"}));
}

TEST(SftPacker, LossMaskRejectsBrokenAttribution) {
  const auto segs = segment_sequence(small_sequence(), 1000,
                                     word_count_estimator(1.0));
  auto rendering = render_segment(segs[0]);
  rendering.spans.pop_back();
  EXPECT_THROW(loss_mask(segs[0], rendering), AttributionError);
  rendering = render_segment(segs[0]);
  rendering.spans[1].element = 99;
  EXPECT_THROW(loss_mask(segs[0], rendering), AttributionError);
}

TEST(SftPacker, JsonInputRoundTrip) {
  const auto j = nlohmann::json::parse(
      testing::read_file(testing::data_path("sft_sequence.json")));
  const auto seq = sequence_from_json(j);
  EXPECT_EQ(seq.pairs.size() + 1, j.at("clips").size());
  const auto segs = segment_sequence(seq, 80, word_count_estimator());
  const auto record = segment_record(segs.front());
  EXPECT_TRUE(record.contains("segment_index"));
  EXPECT_TRUE(record.contains("carried_memory"));
  EXPECT_TRUE(record.contains("elements"));
  EXPECT_TRUE(record.contains("loss_spans"));
}

// Shared by the acceptance suite in spirit; kept small here.
TEST(SftPackerProperty, PairsPartitionAcrossSegments) {
  Rng rng(17);
  const auto est = word_count_estimator();
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = testing::random_sft_sequence(rng, est);
    const auto segs = segment_sequence(r.sequence, r.cap, est);
    std::vector<SftPair> pairs;
    for (const auto& s : segs) {
      EXPECT_LE(s.estimated_tokens, r.cap);
      pairs.insert(pairs.end(), s.pairs.begin(), s.pairs.end());
    }
    EXPECT_EQ(pairs, r.sequence.pairs);
  }
}

}  // namespace
}  // namespace vst
