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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vst {

enum class TokenType : std::uint8_t { kVisual, kText };

// Token-type indicator sequence. Built from strings such as "VVTV".
class TokenTypeSequence {
 public:
  TokenTypeSequence() = default;
  explicit TokenTypeSequence(std::vector<TokenType> types);

  // 'V'/'v' are visual, 'T'/'t' text; anything else raises ParameterError.
  static TokenTypeSequence parse(std::string_view text);

  std::size_t size() const { return types_.size(); }
  TokenType operator[](std::size_t i) const { return types_[i]; }
  bool is_visual(std::size_t i) const { return types_[i] == TokenType::kVisual; }
  const std::vector<TokenType>& types() const { return types_; }
  std::string to_string() const;

 private:
  std::vector<TokenType> types_;
};

// Sequences up to this length are also materialized as dense bit matrices.
inline constexpr std::size_t kDenseMaskLimit = 4096;
inline constexpr float kDefaultDisallowed = -1.0e9f;

// Row i of a streaming mask: every text column j <= i is visible, and the
// visual columns in [visual_window_start, i] are visible. visual_window_start
// is i + 1 when no visual column is visible.
struct RowDescriptor {
  std::size_t visual_window_start = 0;

  bool operator==(const RowDescriptor&) const = default;
};

// Boolean attention mask: allowed(i, j) is true iff token i may attend to j.
// Carries a dense view, a per-row descriptor view, or both.
class AllowMatrix {
 public:
  static AllowMatrix from_dense(std::size_t n, std::vector<std::uint8_t> bits);
  static AllowMatrix from_descriptors(TokenTypeSequence types,
                                      std::vector<RowDescriptor> rows);

  std::size_t size() const { return n_; }
  bool has_dense() const { return !dense_.empty() || n_ == 0; }
  bool has_descriptors() const { return !rows_.empty() || n_ == 0; }

  bool allowed(std::size_t i, std::size_t j) const;
  // Additive form: 0 where allowed, `disallowed` elsewhere.
  float additive(std::size_t i, std::size_t j,
                 float disallowed = kDefaultDisallowed) const;
  std::vector<float> additive_dense(float disallowed = kDefaultDisallowed) const;

  const std::vector<RowDescriptor>& descriptors() const { return rows_; }
  // Row as '0'/'1' characters.
  std::string row_string(std::size_t i) const;

  // True iff the dense and descriptor views (when both exist) agree cellwise.
  bool views_agree() const;

  // Cellwise equality regardless of representation.
  friend bool operator==(const AllowMatrix& a, const AllowMatrix& b);

  void set_dense(std::vector<std::uint8_t> bits);

 private:
  bool dense_allowed(std::size_t i, std::size_t j) const;
  bool descriptor_allowed(std::size_t i, std::size_t j) const;

  std::size_t n_ = 0;
  std::vector<std::uint8_t> dense_;
  std::vector<RowDescriptor> rows_;
  TokenTypeSequence types_;
};

// Streaming mask: (i, j) allowed iff j <= i and (j is text or fewer than L
// visual tokens lie in (j, i]). Linear-time construction via the window of the
// latest L visual positions; dense view added when n <= kDenseMaskLimit.
AllowMatrix build_streaming_mask(const TokenTypeSequence& seq, std::int64_t L);

// Literal cell-by-cell evaluation with a fresh count per cell; O(n^3).
// Test oracle only.
AllowMatrix oracle_mask(const TokenTypeSequence& seq, std::int64_t L);

// Visual indices j <= i visible from row i, ascending.
std::vector<std::size_t> visible_visual_window(const AllowMatrix& mask,
                                               const TokenTypeSequence& seq,
                                               std::size_t i);

// CLI dump: "n L" then one 0/1 row per line.
std::string dump_mask(const AllowMatrix& mask, std::int64_t L);

}  // namespace vst
