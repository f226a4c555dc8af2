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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vst/errors.h"
#include "vst/stream_model.h"

namespace vst::rl {

class GroupError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline constexpr double kDefaultEpsLow = 0.2;
inline constexpr double kDefaultEpsHigh = 0.28;
inline constexpr double kDefaultKlBeta = 0.001;

// One sampled trajectory (all generated thought and answer tokens). ratios[t]
// is pi_theta / pi_sampling at token t; the log-prob pairs feed the KL term
// and may be left empty when beta is zero.
struct Trajectory {
  std::vector<double> ratios;
  std::vector<double> logp_current;
  std::vector<double> logp_reference;
  double reward = 0.0;

  std::size_t token_count() const { return ratios.size(); }
};

struct RolloutGroup {
  std::vector<Trajectory> trajectories;
  double eps_low = kDefaultEpsLow;
  double eps_high = kDefaultEpsHigh;
  double beta = kDefaultKlBeta;
};

// r_i - mean(r). No std normalisation. Throws GroupError when N < 2.
std::vector<double> group_advantages(std::span<const double> rewards);

// min(ratio * A, clip(ratio, 1 - eps_low, 1 + eps_high) * A).
double clipped_term(double ratio, double advantage, double eps_low,
                    double eps_high);

// exp(d) - d - 1 with d = logp_reference - logp_current.
double kl_penalty(double logp_current, double logp_reference);

// Token-mean surrogate: sum over trajectories and tokens of
// (clipped_term - beta * kl_penalty), divided by the total token count. The
// trajectory advantage is broadcast to every one of its tokens.
double objective(const RolloutGroup& group);

enum class AnswerKind { kMultipleChoice, kNumericCount, kFreeText };

struct GoldAnswer {
  AnswerKind kind = AnswerKind::kMultipleChoice;
  std::string value;
  double numeric_tolerance = 0.0;
};

// Reward from the last \boxed{} span of the answer: 1 on match, else 0.
double verify_reward(const AnswerRecord& answer, const GoldAnswer& gold);

Trajectory trajectory_from_json(const nlohmann::json& j);
// Validates every trajectory; throws GroupError naming the first problem.
void validate_group(const RolloutGroup& group);

}  // namespace vst::rl
