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
#include <functional>
#include <optional>
#include <vector>

#include "cadasim/numerics.hpp"
#include "cadasim/optimizer.hpp"
#include "cadasim/problems.hpp"

namespace cadasim {

// Empirical stand-in for the per-worker gradient bounds sigma_m: the
// running max of observed stochastic-gradient norms.
class GradNormTracker {
 public:
  explicit GradNormTracker(std::size_t workers) : sigma_(workers, 0.0) {}

  void update(std::size_t worker, const ParamVector& grad);
  void update_norm(std::size_t worker, double norm);

  std::size_t workers() const noexcept { return sigma_.size(); }
  double sigma(std::size_t worker) const { return sigma_.at(worker); }
  double mean() const noexcept;          // (1/M) sum sigma_m
  double mean_of_squares() const noexcept;  // (1/M) sum sigma_m^2

 private:
  std::vector<double> sigma_;
};

GradNormTracker update_tracker(GradNormTracker tracker, std::size_t worker,
                               const ParamVector& grad);

inline constexpr double kMonitorSlack = 1e-9;

struct MomentumCheck {
  bool passed = true;
  double h_ratio = 0.0;  // |h| / mean sigma
  double v_ratio = 0.0;  // max_i v_hat_i / mean sigma^2
};

// |h| <= mean(sigma) and v_hat_i <= mean(sigma^2), each with relative
// slack kMonitorSlack.
MomentumCheck check_momentum_bounds(const AdamState& adam,
                                    const GradNormTracker& tracker);

// alpha^2 p / ((1 - beta2)(1 - beta3)), beta3 = beta1^2 / beta2.
double step_norm_bound(double alpha, std::size_t p, const AdamConfig& cfg);

struct StepCheck {
  bool passed = true;
  double sq_step = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // sq_step / bound
};

StepCheck check_step_bound(const ParamVector& theta_new,
                           const ParamVector& theta_old, double alpha,
                           const AdamConfig& cfg);

using LossFn = std::function<double(const ParamVector&)>;
using GradFn = std::function<ParamVector(const ParamVector&)>;

// max_j |analytic_j - numeric_j| / max(1, |analytic_j|) with central
// differences of step h.
double finite_diff_gradcheck(const LossFn& loss_fn, const GradFn& grad_fn,
                             const ParamVector& theta, double h);
double finite_diff_gradcheck(const ProblemSpec& spec, const Dataset& data,
                             const ParamVector& theta, const Minibatch& batch,
                             double h);

struct RoundRecord {
  std::size_t round = 0;
  std::optional<double> loss;
  std::optional<double> grad_norm_sq;
  std::size_t uploads = 0;
  std::size_t cum_uploads = 0;
  std::size_t cum_grad_evals = 0;
  double alpha = 0.0;  // stepsize of the round that produced this row; 0 for row 0
  std::size_t skips = 0;
  std::size_t forced = 0;
  double mean_lhs = 0.0;
  double mean_rhs = 0.0;
};

struct MonitorSummary {
  std::size_t rounds_checked = 0;
  std::size_t momentum_violations = 0;
  std::size_t step_violations = 0;
  std::size_t aggregate_violations = 0;
  double max_h_ratio = 0.0;
  double max_v_ratio = 0.0;
  double max_step_ratio = 0.0;
  double max_aggregate_error = 0.0;

  std::size_t total_violations() const noexcept {
    return momentum_violations + step_violations + aggregate_violations;
  }
};

// Row k describes the state after k rounds (row 0 is the initial point).
struct MetricsLog {
  std::size_t workers = 0;
  std::vector<RoundRecord> rounds;
  MonitorSummary monitors;
  ParamVector final_theta;

  std::size_t total_uploads() const noexcept {
    return rounds.empty() ? 0 : rounds.back().cum_uploads;
  }
};

}  // namespace cadasim
