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

#include "vst/rl_objective.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "vst/prompts.h"

namespace vst::rl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// "B", "(b)", "B.", "B) cat" -> 'B'.
std::optional<char> choice_letter(std::string_view raw) {
  std::string s = trim(raw);
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '(' || s[i] == '[')) ++i;
  if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) {
    return std::nullopt;
  }
  const char letter = static_cast<char>(
      std::toupper(static_cast<unsigned char>(s[i])));
  if (i + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[i + 1]))) {
    return std::nullopt;
  }
  return letter;
}

std::optional<double> parse_number(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !std::isfinite(v)) return std::nullopt;
  if (trim(std::string_view(end)).size() != 0) return std::nullopt;
  return v;
}

std::string normalize_text(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(u));
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) {
    out.pop_back();
  }
  return out;
}

}  // namespace

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw GroupError("group-relative advantages need N >= 2, got " +
                     std::to_string(rewards.size()));
  }
  // Mean taken about the first reward, so equal rewards give exact zeros.
  const double pivot = rewards.front();
  double shifted = 0.0;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw DomainError("non-finite reward");
    shifted += r - pivot;
  }
  const double mean = pivot + shifted / static_cast<double>(rewards.size());
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back(r - mean);
  return out;
}

double clipped_term(double ratio, double advantage, double eps_low,
                    double eps_high) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw DomainError("probability ratio must be positive and finite");
  }
  const double clipped = std::clamp(ratio, 1.0 - eps_low, 1.0 + eps_high);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_penalty(double logp_current, double logp_reference) {
  if (!std::isfinite(logp_current) || !std::isfinite(logp_reference)) {
    throw DomainError("non-finite log-probability");
  }
  const double d = logp_reference - logp_current;
  // expm1 keeps precision near d == 0 where the estimator is quadratic.
  return std::max(0.0, std::expm1(d) - d);
}

void validate_group(const RolloutGroup& group) {
  if (group.trajectories.empty()) throw GroupError("rollout group is empty");
  if (group.eps_low < 0.0 || group.eps_low >= 1.0 || group.eps_high < 0.0 ||
      group.eps_high >= 1.0) {
    throw GroupError("clip bounds must lie in [0, 1)");
  }
  if (group.beta < 0.0) throw GroupError("beta must be non-negative");
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    const auto& t = group.trajectories[i];
    const std::string where = "trajectory " + std::to_string(i);
    if (t.ratios.empty()) throw GroupError(where + " has no tokens");
    for (double r : t.ratios) {
      if (!(r > 0.0)) throw GroupError(where + " has a non-positive ratio");
    }
    const bool has_logps = !t.logp_current.empty() || !t.logp_reference.empty();
    if (has_logps && (t.logp_current.size() != t.ratios.size() ||
                      t.logp_reference.size() != t.ratios.size())) {
      throw GroupError(where + " log-prob series do not match its length");
    }
    if (!has_logps && group.beta > 0.0) {
      throw GroupError(where + " needs log-probs when beta > 0");
    }
  }
}

double objective(const RolloutGroup& group) {
  validate_group(group);
  std::vector<double> rewards;
  rewards.reserve(group.trajectories.size());
  for (const auto& t : group.trajectories) rewards.push_back(t.reward);
  const auto advantages = group_advantages(rewards);

  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
    const auto& t = group.trajectories[i];
    for (std::size_t k = 0; k < t.ratios.size(); ++k) {
      double term = clipped_term(t.ratios[k], advantages[i], group.eps_low,
                                 group.eps_high);
      if (group.beta > 0.0) {
        term -= group.beta * kl_penalty(t.logp_current[k], t.logp_reference[k]);
      }
      total += term;
    }
    tokens += t.ratios.size();
  }
  return total / static_cast<double>(tokens);
}

double verify_reward(const AnswerRecord& answer, const GoldAnswer& gold) {
  const auto boxed = extract_boxed(answer.text);
  if (!boxed) return 0.0;
  switch (gold.kind) {
    case AnswerKind::kMultipleChoice: {
      const auto predicted = choice_letter(*boxed);
      const auto expected = choice_letter(gold.value);
      return predicted && expected && *predicted == *expected ? 1.0 : 0.0;
    }
    case AnswerKind::kNumericCount: {
      const auto predicted = parse_number(*boxed);
      const auto expected = parse_number(gold.value);
      if (!predicted || !expected) return 0.0;
      return std::fabs(*predicted - *expected) <= gold.numeric_tolerance ? 1.0
                                                                         : 0.0;
    }
    case AnswerKind::kFreeText:
      return normalize_text(*boxed) == normalize_text(gold.value) ? 1.0 : 0.0;
  }
  return 0.0;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  t.reward = j.at("reward").get<double>();
  t.ratios = j.at("ratios").get<std::vector<double>>();
  if (auto it = j.find("logp_cur"); it != j.end()) {
    t.logp_current = it->get<std::vector<double>>();
  }
  if (auto it = j.find("logp_ref"); it != j.end()) {
    t.logp_reference = it->get<std::vector<double>>();
  }
  return t;
}

}  // namespace vst::rl
