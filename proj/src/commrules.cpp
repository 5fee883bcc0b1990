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
#include "cadasim/commrules.hpp"

#include <cmath>

#include "cadasim/errors.hpp"

namespace cadasim {

const char* to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::kLag: return "lag";
    case RuleKind::kCada1: return "cada1";
    case RuleKind::kCada2: return "cada2";
    case RuleKind::kAlwaysUpload: return "always_upload";
  }
  return "?";
}

void RuleConfig::validate() const {
  if (!(c >= 0.0)) throw ConfigError("rule threshold c must be >= 0");
  if (d_max < 1) throw ConfigError("d_max must be >= 1");
  if (max_delay < 1) throw ConfigError("max delay D must be >= 1");
}

double rhs_threshold(const RuleConfig& cfg, const StepNormWindow& window) {
  if (window.capacity() != cfg.d_max) {
    throw ContractError("rhs_threshold: window capacity differs from d_max");
  }
  if (cfg.c == 0.0) return 0.0;
  if (std::isinf(cfg.c)) return kSkipUnlessForced;
  return cfg.c / static_cast<double>(cfg.d_max) * window.sum();
}

Decision evaluate_rule(const RuleConfig& cfg, const ParamVector& innovation,
                       double threshold, std::size_t staleness) {
  if (!(threshold >= 0.0)) {
    throw ContractError("evaluate_rule: threshold must be >= 0");
  }
  if (staleness < 1) throw ContractError("evaluate_rule: staleness must be >= 1");

  Decision d;
  d.lhs = squared_l2_norm(innovation);
  d.rhs = threshold;
  if (cfg.kind == RuleKind::kAlwaysUpload) {
    d.action = Action::kUpload;
  } else if (staleness >= cfg.max_delay) {
    d.action = Action::kUpload;
    d.forced = true;
  } else {
    d.action = d.lhs <= threshold ? Action::kSkip : Action::kUpload;
  }
  return d;
}

}  // namespace cadasim
