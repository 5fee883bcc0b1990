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
#include <string>

#include "cadasim/numerics.hpp"

namespace cadasim {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  double beta3() const noexcept { return beta1 * beta1 / beta2; }

  // beta1 in [0,1), beta2 in (0,1), epsilon > 0, beta1^2 < beta2.
  void validate() const;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// h: first moment, v: second moment, v_hat: running entrywise max of v.
struct AdamState {
  ParamVector h;
  ParamVector v;
  ParamVector v_hat;

  static AdamState zeros(std::size_t p) {
    return AdamState{ParamVector(p), ParamVector(p), ParamVector(p)};
  }
};

struct AdamStepResult {
  AdamState state;
  ParamVector theta;
};

// One server update on the aggregated gradient g (no bias correction):
//   h'     = beta1 h + (1 - beta1) g
//   v'     = beta2 v_hat + (1 - beta2) g^2
//   v_hat' = max(v', v_hat)
//   theta' = theta - alpha h' / sqrt(eps + v_hat')
// Only shape, finiteness and alpha > 0 are checked here; AdamConfig's
// invariants are enforced where configs enter the system.
void apply_adam_step(AdamState& state, const AdamConfig& cfg,
                     const ParamVector& aggregate, ParamVector& theta,
                     double alpha);
AdamStepResult adam_step(AdamState state, const AdamConfig& cfg,
                         const ParamVector& aggregate, ParamVector theta,
                         double alpha);

enum class ScheduleKind { kConstant, kSqrtHorizon, kPlInverse };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// constant: alpha. sqrt_horizon: eta / sqrt(horizon) for every round.
// pl_inverse: 2 / (mu (k + k0)).
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double alpha = 0.005;
  double eta = 1.0;
  std::size_t horizon = 1;
  double mu = 1.0;
  double k0 = 1.0;

  static StepSchedule constant(double alpha);
  static StepSchedule sqrt_horizon(double eta, std::size_t horizon);
  static StepSchedule pl_inverse(double mu, double k0);

  void validate() const;
  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;
};

double stepsize(const StepSchedule& schedule, std::size_t k);

struct MomentumState {
  ParamVector u;
};

struct MomentumStepResult {
  MomentumState state;
  ParamVector theta;
};

// u' = beta u + g; theta' = theta - alpha u'
void apply_momentum_sgd_step(MomentumState& state, const ParamVector& grad,
                             ParamVector& theta, double alpha, double beta);
MomentumStepResult momentum_sgd_step(MomentumState state, const ParamVector& grad,
                                     ParamVector theta, double alpha, double beta);

}  // namespace cadasim
