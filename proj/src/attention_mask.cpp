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

#include "vst/attention_mask.h"

#include <deque>
#include <utility>

#include "vst/errors.h"

namespace vst {

namespace {

void check_args(const TokenTypeSequence& seq, std::int64_t L) {
  if (L < 1) throw ParameterError("visual window L must be >= 1");
  if (seq.size() == 0) throw ParameterError("token sequence is empty");
}

}  // namespace

TokenTypeSequence::TokenTypeSequence(std::vector<TokenType> types)
    : types_(std::move(types)) {}

TokenTypeSequence TokenTypeSequence::parse(std::string_view text) {
  std::vector<TokenType> types;
  types.reserve(text.size());
  for (char c : text) {
    if (c == 'V' || c == 'v') {
      types.push_back(TokenType::kVisual);
    } else if (c == 'T' || c == 't') {
      types.push_back(TokenType::kText);
    } else {
      throw ParameterError(std::string("bad token type '") + c +
                           "', expected V or T");
    }
  }
  return TokenTypeSequence(std::move(types));
}

std::string TokenTypeSequence::to_string() const {
  std::string out;
  out.reserve(types_.size());
  for (auto t : types_) out += t == TokenType::kVisual ? 'V' : 'T';
  return out;
}

AllowMatrix AllowMatrix::from_dense(std::size_t n,
                                    std::vector<std::uint8_t> bits) {
  if (bits.size() != n * n) throw ParameterError("dense mask must be n*n");
  AllowMatrix m;
  m.n_ = n;
  m.dense_ = std::move(bits);
  return m;
}

AllowMatrix AllowMatrix::from_descriptors(TokenTypeSequence types,
                                          std::vector<RowDescriptor> rows) {
  if (rows.size() != types.size()) {
    throw ParameterError("one descriptor per row required");
  }
  AllowMatrix m;
  m.n_ = types.size();
  m.rows_ = std::move(rows);
  m.types_ = std::move(types);
  return m;
}

void AllowMatrix::set_dense(std::vector<std::uint8_t> bits) {
  if (bits.size() != n_ * n_) throw ParameterError("dense mask must be n*n");
  dense_ = std::move(bits);
}

bool AllowMatrix::dense_allowed(std::size_t i, std::size_t j) const {
  return dense_[i * n_ + j] != 0;
}

bool AllowMatrix::descriptor_allowed(std::size_t i, std::size_t j) const {
  if (j > i) return false;
  if (!types_.is_visual(j)) return true;
  return j >= rows_[i].visual_window_start;
}

bool AllowMatrix::allowed(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ParameterError("mask index out of range");
  return !dense_.empty() ? dense_allowed(i, j) : descriptor_allowed(i, j);
}

float AllowMatrix::additive(std::size_t i, std::size_t j,
                            float disallowed) const {
  return allowed(i, j) ? 0.0f : disallowed;
}

std::vector<float> AllowMatrix::additive_dense(float disallowed) const {
  std::vector<float> out(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      out[i * n_ + j] = allowed(i, j) ? 0.0f : disallowed;
    }
  }
  return out;
}

std::string AllowMatrix::row_string(std::size_t i) const {
  std::string row(n_, '0');
  for (std::size_t j = 0; j <= i && j < n_; ++j) {
    if (allowed(i, j)) row[j] = '1';
  }
  return row;
}

bool AllowMatrix::views_agree() const {
  if (dense_.empty() || rows_.empty()) return true;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (dense_allowed(i, j) != descriptor_allowed(i, j)) return false;
    }
  }
  return true;
}

bool operator==(const AllowMatrix& a, const AllowMatrix& b) {
  if (a.n_ != b.n_) return false;
  for (std::size_t i = 0; i < a.n_; ++i) {
    for (std::size_t j = 0; j < a.n_; ++j) {
      if (a.allowed(i, j) != b.allowed(i, j)) return false;
    }
  }
  return true;
}

AllowMatrix build_streaming_mask(const TokenTypeSequence& seq,
                                 std::int64_t L) {
  check_args(seq, L);
  const std::size_t n = seq.size();
  const auto window = static_cast<std::uint64_t>(L);

  // Positions of the latest L visual tokens seen so far.
  std::deque<std::size_t> recent;
  std::vector<RowDescriptor> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (seq.is_visual(i)) {
      recent.push_back(i);
      if (recent.size() > window) recent.pop_front();
    }
    rows[i].visual_window_start = recent.empty() ? i + 1 : recent.front();
  }

  auto mask = AllowMatrix::from_descriptors(seq, std::move(rows));
  if (n <= kDenseMaskLimit) {
    std::vector<std::uint8_t> bits(n * n, 0);
    const auto& desc = mask.descriptors();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        bits[i * n + j] =
            !seq.is_visual(j) || j >= desc[i].visual_window_start ? 1 : 0;
      }
    }
    mask.set_dense(std::move(bits));
  }
  return mask;
}

AllowMatrix oracle_mask(const TokenTypeSequence& seq, std::int64_t L) {
  check_args(seq, L);
  const std::size_t n = seq.size();
  std::vector<std::uint8_t> bits(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j > i) continue;
      std::int64_t visual_after = 0;
      for (std::size_t t = j + 1; t <= i; ++t) {
        if (seq.is_visual(t)) ++visual_after;
      }
      const bool ok = !seq.is_visual(j) || visual_after < L;
      bits[i * n + j] = ok ? 1 : 0;
    }
  }
  return AllowMatrix::from_dense(n, std::move(bits));
}

std::vector<std::size_t> visible_visual_window(const AllowMatrix& mask,
                                               const TokenTypeSequence& seq,
                                               std::size_t i) {
  if (i >= mask.size() || i >= seq.size()) {
    throw ParameterError("row " + std::to_string(i) + " out of range");
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j <= i; ++j) {
    if (seq.is_visual(j) && mask.allowed(i, j)) out.push_back(j);
  }
  return out;
}

std::string dump_mask(const AllowMatrix& mask, std::int64_t L) {
  std::string out =
      std::to_string(mask.size()) + " " + std::to_string(L) + "\n";
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out += mask.row_string(i);
    out += '\n';
  }
  return out;
}

}  // namespace vst
