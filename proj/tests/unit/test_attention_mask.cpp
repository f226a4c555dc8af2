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
#include "vst/attention_mask.h"

namespace vst {
namespace {

TEST(AttentionMask, FixtureVVTV) {
  const auto seq = TokenTypeSequence::parse("VVTV");
  const auto mask = build_streaming_mask(seq, 2);
  EXPECT_EQ(mask.row_string(0), "1000");
  EXPECT_EQ(mask.row_string(1), "1100");
  EXPECT_EQ(mask.row_string(2), "1110");
  EXPECT_EQ(mask.row_string(3), "0111");
  EXPECT_EQ(visible_visual_window(mask, seq, 3),
            (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(dump_mask(mask, 2), "4 2\n1000\n1100\n1110\n0111\n");
}

TEST(AttentionMask, AllTextIsCausal) {
  const auto seq = TokenTypeSequence::parse("TTTT");
  const auto mask = build_streaming_mask(seq, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(mask.allowed(i, j), j <= i);
  }
}

TEST(AttentionMask, AdditiveForm) {
  const auto mask = build_streaming_mask(TokenTypeSequence::parse("VV"), 1);
  EXPECT_EQ(mask.additive(1, 1), 0.0f);
  EXPECT_EQ(mask.additive(1, 0), kDefaultDisallowed);
  EXPECT_EQ(mask.additive(0, 1, -5.0f), -5.0f);
  EXPECT_EQ(mask.additive_dense().size(), 4u);
}

TEST(AttentionMask, RejectsBadInput) {
  EXPECT_THROW(TokenTypeSequence::parse("VX"), ParameterError);
  EXPECT_THROW(build_streaming_mask(TokenTypeSequence::parse("V"), 0),
               ParameterError);
  EXPECT_THROW(build_streaming_mask(TokenTypeSequence{}, 2), ParameterError);
  const auto mask = build_streaming_mask(TokenTypeSequence::parse("VV"), 1);
  EXPECT_THROW(mask.allowed(2, 0), ParameterError);
}

TEST(AttentionMask, LargeSequencesUseDescriptorsOnly) {
  testing::Rng rng(1);
  const auto seq = testing::random_types(rng, kDenseMaskLimit + 10, 0.7);
  const auto mask = build_streaming_mask(seq, 64);
  EXPECT_FALSE(mask.has_dense());
  EXPECT_TRUE(mask.has_descriptors());
  // Spot-check against the rule on the last row.
  const std::size_t i = seq.size() - 1;
  std::size_t newer = 0;
  for (std::size_t j = i + 1; j-- > 0;) {
    const bool expected = !seq.is_visual(j) || newer < 64;
    EXPECT_EQ(mask.allowed(i, j), expected) << j;
    if (seq.is_visual(j)) ++newer;
  }
}

TEST(AttentionMaskProperty, DenseAndDescriptorViewsAgree) {
  testing::Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto seq = testing::random_types(
        rng, static_cast<std::size_t>(testing::uniform(rng, 1, 80)), 0.6);
    const auto mask = build_streaming_mask(seq, testing::uniform(rng, 1, 10));
    EXPECT_TRUE(mask.views_agree());
  }
}

}  // namespace
}  // namespace vst
