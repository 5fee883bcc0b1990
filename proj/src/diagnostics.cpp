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
#include "cadasim/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "cadasim/errors.hpp"

namespace cadasim {
namespace {

double ratio_of(double measured, double bound) {
  if (bound > 0.0) return measured / bound;
  return measured > 0.0 ? INFINITY : 0.0;
}

}  // namespace

void GradNormTracker::update(std::size_t worker, const ParamVector& grad) {
  update_norm(worker, l2_norm(grad));
}

void GradNormTracker::update_norm(std::size_t worker, double norm) {
  double& s = sigma_.at(worker);
  s = std::max(s, norm);
}

double GradNormTracker::mean() const noexcept {
  if (sigma_.empty()) return 0.0;
  double acc = 0.0;
  for (double s : sigma_) acc += s;
  return acc / static_cast<double>(sigma_.size());
}

double GradNormTracker::mean_of_squares() const noexcept {
  if (sigma_.empty()) return 0.0;
  double acc = 0.0;
  for (double s : sigma_) acc += s * s;
  return acc / static_cast<double>(sigma_.size());
}

GradNormTracker update_tracker(GradNormTracker tracker, std::size_t worker,
                               const ParamVector& grad) {
  tracker.update(worker, grad);
  return tracker;
}

MomentumCheck check_momentum_bounds(const AdamState& adam,
                                    const GradNormTracker& tracker) {
  MomentumCheck out;
  const double h_norm = l2_norm(adam.h);
  const double sigma = tracker.mean();
  const double sigma_sq = tracker.mean_of_squares();
  double v_max = 0.0;
  for (double v : adam.v_hat) v_max = std::max(v_max, v);

  out.h_ratio = ratio_of(h_norm, sigma);
  out.v_ratio = ratio_of(v_max, sigma_sq);
  out.passed = h_norm <= sigma * (1.0 + kMonitorSlack) &&
               v_max <= sigma_sq * (1.0 + kMonitorSlack);
  return out;
}

double step_norm_bound(double alpha, std::size_t p, const AdamConfig& cfg) {
  if (!(cfg.beta1 * cfg.beta1 < cfg.beta2) || !(cfg.beta2 < 1.0)) {
    throw ConfigError("step bound needs beta1^2 < beta2 < 1");
  }
  return alpha * alpha * static_cast<double>(p) / (1.0 - cfg.beta2) /
         (1.0 - cfg.beta3());
}

StepCheck check_step_bound(const ParamVector& theta_new,
                           const ParamVector& theta_old, double alpha,
                           const AdamConfig& cfg) {
  StepCheck out;
  out.bound = step_norm_bound(alpha, theta_new.size(), cfg);
  out.sq_step = squared_distance(theta_new, theta_old);
  out.ratio = ratio_of(out.sq_step, out.bound);
  out.passed = out.sq_step <= out.bound * (1.0 + kMonitorSlack);
  return out;
}

double finite_diff_gradcheck(const LossFn& loss_fn, const GradFn& grad_fn,
                             const ParamVector& theta, double h) {
  if (!(h > 0.0)) throw ContractError("finite difference step must be > 0");
  const ParamVector analytic = grad_fn(theta);
  require_same_size(analytic, theta, "finite_diff_gradcheck");
  double worst = 0.0;
  ParamVector probe = theta;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    probe[j] = theta[j] + h;
    const double up = loss_fn(probe);
    probe[j] = theta[j] - h;
    const double down = loss_fn(probe);
    probe[j] = theta[j];
    const double numeric = (up - down) / (2.0 * h);
    const double err =
        std::abs(analytic[j] - numeric) / std::max(1.0, std::abs(analytic[j]));
    worst = std::max(worst, err);
  }
  return worst;
}

double finite_diff_gradcheck(const ProblemSpec& spec, const Dataset& data,
                             const ParamVector& theta, const Minibatch& batch,
                             double h) {
  return finite_diff_gradcheck(
      [&](const ParamVector& t) { return loss(spec, data, t, batch); },
      [&](const ParamVector& t) { return gradient(spec, data, t, batch); }, theta,
      h);
}

}  // namespace cadasim
