// Copyright 2026 The cadasim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "cadasim/numerics.hpp"

namespace cadasim {

enum class RuleKind { kLag, kCada1, kCada2, kAlwaysUpload };

const char* to_string(RuleKind kind);

// Upload test shared by the lazily-aggregated rules: a worker may skip when
//   |innovation|^2 <= (c / d_max) * sum_{d=1..d_max} |theta^{k+1-d} - theta^{k-d}|^2
// and its staleness is below max_delay. c may be +infinity, meaning "skip
// unless forced".
struct RuleConfig {
  RuleKind kind = RuleKind::kCada2;
  double c = 1.0;
  std::size_t d_max = 10;
  std::size_t max_delay = 100;  // D

  void validate() const;
  friend bool operator==(const RuleConfig&, const RuleConfig&) = default;
};

inline constexpr double kSkipUnlessForced = std::numeric_limits<double>::infinity();

enum class Action { kUpload, kSkip };

struct Decision {
  Action action = Action::kUpload;
  double lhs = 0.0;  // |innovation|^2
  double rhs = 0.0;  // threshold
  bool forced = false;
};

double rhs_threshold(const RuleConfig& cfg, const StepNormWindow& window);

// Skips on equality. staleness >= max_delay forces an upload; lhs is still
// measured and reported.
Decision evaluate_rule(const RuleConfig& cfg, const ParamVector& innovation,
                       double threshold, std::size_t staleness);

}  // namespace cadasim
