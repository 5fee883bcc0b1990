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
#include "cadasim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cadasim/errors.hpp"

namespace cadasim {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be > 0");
  }
  if (!(beta1 * beta1 < beta2)) {
    throw ConfigError("beta1^2 must be < beta2 (got beta1=" +
                      format_shortest(beta1) + ", beta2=" + format_shortest(beta2) +
                      ")");
  }
}

void apply_adam_step(AdamState& state, const AdamConfig& cfg,
                     const ParamVector& aggregate, ParamVector& theta,
                     double alpha) {
  require_same_size(aggregate, theta, "adam_step aggregate");
  require_same_size(state.h, theta, "adam_step h");
  require_same_size(state.v, theta, "adam_step v");
  require_same_size(state.v_hat, theta, "adam_step v_hat");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractError("adam_step: stepsize must be > 0");
  }
  aggregate.check_finite("adam_step aggregate");

  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = aggregate[i];
    const double h = b1 * state.h[i] + (1.0 - b1) * g;
    const double v = b2 * state.v_hat[i] + (1.0 - b2) * g * g;
    const double v_hat = std::max(v, state.v_hat[i]);
    const double denom = std::sqrt(cfg.epsilon + v_hat);
    state.h[i] = h;
    state.v[i] = v;
    state.v_hat[i] = v_hat;
    // 0/0 only arises with epsilon = 0 and a zero history; h is 0 then.
    if (denom > 0.0) theta[i] -= alpha * h / denom;
  }
  theta.check_finite("adam_step theta");
}

AdamStepResult adam_step(AdamState state, const AdamConfig& cfg,
                         const ParamVector& aggregate, ParamVector theta,
                         double alpha) {
  apply_adam_step(state, cfg, aggregate, theta, alpha);
  return AdamStepResult{std::move(state), std::move(theta)};
}

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kSqrtHorizon: return "sqrt_horizon";
    case ScheduleKind::kPlInverse: return "pl_inverse";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "sqrt_horizon") return ScheduleKind::kSqrtHorizon;
  if (name == "pl_inverse") return ScheduleKind::kPlInverse;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

StepSchedule StepSchedule::constant(double alpha) {
  StepSchedule s;
  s.kind = ScheduleKind::kConstant;
  s.alpha = alpha;
  return s;
}

StepSchedule StepSchedule::sqrt_horizon(double eta, std::size_t horizon) {
  StepSchedule s;
  s.kind = ScheduleKind::kSqrtHorizon;
  s.eta = eta;
  s.horizon = horizon;
  return s;
}

StepSchedule StepSchedule::pl_inverse(double mu, double k0) {
  StepSchedule s;
  s.kind = ScheduleKind::kPlInverse;
  s.mu = mu;
  s.k0 = k0;
  return s;
}

void StepSchedule::validate() const {
  switch (kind) {
    case ScheduleKind::kConstant:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("constant schedule needs alpha > 0");
      }
      break;
    case ScheduleKind::kSqrtHorizon:
      if (!(eta > 0.0) || !std::isfinite(eta) || horizon < 1) {
        throw ConfigError("sqrt_horizon schedule needs eta > 0 and horizon >= 1");
      }
      break;
    case ScheduleKind::kPlInverse:
      if (!(mu > 0.0) || !std::isfinite(mu) || !(k0 > 0.0) || !std::isfinite(k0)) {
        throw ConfigError("pl_inverse schedule needs mu > 0 and k0 > 0");
      }
      break;
  }
}

double stepsize(const StepSchedule& schedule, std::size_t k) {
  switch (schedule.kind) {
    case ScheduleKind::kConstant:
      return schedule.alpha;
    case ScheduleKind::kSqrtHorizon:
      return schedule.eta / std::sqrt(static_cast<double>(schedule.horizon));
    case ScheduleKind::kPlInverse:
      return 2.0 / (schedule.mu * (static_cast<double>(k) + schedule.k0));
  }
  return 0.0;
}

void apply_momentum_sgd_step(MomentumState& state, const ParamVector& grad,
                             ParamVector& theta, double alpha, double beta) {
  require_same_size(state.u, theta, "momentum_sgd_step velocity");
  require_same_size(grad, theta, "momentum_sgd_step gradient");
  state.u *= beta;
  state.u += grad;
  theta.add_scaled(-alpha, state.u);
}

MomentumStepResult momentum_sgd_step(MomentumState state, const ParamVector& grad,
                                     ParamVector theta, double alpha, double beta) {
  apply_momentum_sgd_step(state, grad, theta, alpha, beta);
  return MomentumStepResult{std::move(state), std::move(theta)};
}

}  // namespace cadasim
