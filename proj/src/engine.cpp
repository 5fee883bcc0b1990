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
#include "cadasim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

#include "cadasim/errors.hpp"

namespace cadasim {
namespace {

constexpr std::uint64_t kWorkerSalt = 0x574f524b4552ULL;
constexpr double kAggregateSlack = 1e-12;

// Runs fn(m) for every worker, optionally across threads. Each worker
// index is touched by exactly one thread, so results do not depend on the
// thread count.
template <typename Fn>
void for_each_worker(std::size_t threads, std::size_t workers, Fn&& fn) {
  const std::size_t used = std::min(std::max<std::size_t>(threads, 1), workers);
  if (used <= 1) {
    for (std::size_t m = 0; m < workers; ++m) fn(m);
    return;
  }
  std::vector<std::exception_ptr> errors(used);
  {
    std::vector<std::jthread> pool;
    pool.reserve(used);
    for (std::size_t t = 0; t < used; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t m = t; m < workers; m += used) fn(m);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Evaluator {
  const ProblemSpec& spec;
  std::vector<const Dataset*> parts;
  std::size_t eval_every;
  std::size_t rounds;

  bool due(std::size_t row) const {
    return row % eval_every == 0 || row == rounds;
  }

  void fill(RoundRecord& rec, const ParamVector& theta) const {
    rec.loss = pooled_loss(spec, parts, theta);
    rec.grad_norm_sq = squared_l2_norm(pooled_gradient(spec, parts, theta));
  }
};

ParamVector mean_of(std::span<const ParamVector> vectors) {
  ParamVector mean(vectors.front().size());
  for (const ParamVector& v : vectors) mean += v;
  mean *= 1.0 / static_cast<double>(vectors.size());
  return mean;
}

void check_problem(const ExperimentConfig& cfg, const Problem& problem) {
  if (problem.shards.size() != cfg.workers) {
    throw ConfigError("problem has " + std::to_string(problem.shards.size()) +
                      " shards but the config asks for " +
                      std::to_string(cfg.workers) + " workers");
  }
  problem.spec.validate();
  for (const Shard& s : problem.shards) validate_dataset(problem.spec, s.data);
}

}  // namespace

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kAdam: return "adam";
    case Algorithm::kLag: return "lag";
    case Algorithm::kCada1: return "cada1";
    case Algorithm::kCada2: return "cada2";
    case Algorithm::kLocalMomentum: return "local_momentum";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "adam") return Algorithm::kAdam;
  if (name == "lag") return Algorithm::kLag;
  if (name == "cada1") return Algorithm::kCada1;
  if (name == "cada2") return Algorithm::kCada2;
  if (name == "local_momentum") return Algorithm::kLocalMomentum;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected adam, lag, cada1, cada2 or local_momentum)");
}

RuleConfig ExperimentConfig::effective_rule() const {
  RuleConfig r = rule;
  switch (algorithm) {
    case Algorithm::kLag: r.kind = RuleKind::kLag; break;
    case Algorithm::kCada1: r.kind = RuleKind::kCada1; break;
    case Algorithm::kCada2: r.kind = RuleKind::kCada2; break;
    case Algorithm::kAdam:
    case Algorithm::kLocalMomentum: r.kind = RuleKind::kAlwaysUpload; break;
  }
  return r;
}

std::size_t ExperimentConfig::batch_size_for(std::size_t shard_size) const {
  std::size_t b = batch_size.has_value()
                      ? *batch_size
                      : static_cast<std::size_t>(
                            std::ceil(batch_ratio * static_cast<double>(shard_size)));
  return std::clamp<std::size_t>(b, 1, shard_size);
}

void ExperimentConfig::validate() const {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (batch_size.has_value() && *batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  if (!(batch_ratio > 0.0 && batch_ratio <= 1.0)) {
    throw ConfigError("batch_ratio must lie in (0, 1]");
  }
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (averaging_interval < 1) throw ConfigError("H must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(problem.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  rule.validate();
  adam.validate();
  schedule.validate();
}

Problem build_problem(const ExperimentConfig& cfg) {
  const ProblemConfig& pc = cfg.problem;
  const std::uint64_t data_seed = pc.seed.value_or(cfg.seed);
  Problem out;
  out.spec.kind = pc.kind;
  out.spec.lambda = pc.lambda;

  if (pc.source == DataSource::kSynthetic) {
    switch (pc.kind) {
      case ProblemKind::kBinaryLogistic:
        out.shards = gen_synthetic_logreg(pc.p, pc.n, cfg.workers, data_seed,
                                          pc.heterogeneity);
        break;
      case ProblemKind::kMulticlassLogistic:
        out.spec.classes = pc.classes;
        out.shards = gen_synthetic_multiclass(pc.p, pc.n, cfg.workers, pc.classes,
                                              data_seed, pc.heterogeneity);
        break;
      case ProblemKind::kQuadratic: {
        QuadraticProblem q =
            gen_quadratic(pc.p, pc.n, data_seed, pc.cond, pc.noise, pc.lambda);
        out.minimizer = std::move(q.minimizer);
        out.shards = partition(q.data, cfg.workers, {pc.partition, data_seed},
                               data_seed);
        break;
      }
    }
    out.spec.feature_dim = pc.p;
  } else {
    Dataset data = read_libsvm_file(pc.path);
    switch (pc.kind) {
      case ProblemKind::kBinaryLogistic:
        data = binarize_labels(std::move(data));
        break;
      case ProblemKind::kMulticlassLogistic:
        data = index_class_labels(std::move(data), &out.spec.classes);
        break;
      case ProblemKind::kQuadratic:
        break;
    }
    out.spec.feature_dim = data.dim;
    out.shards = partition(data, cfg.workers, {pc.partition, data_seed}, data_seed);
  }
  check_problem(cfg, out);
  return out;
}

Rng worker_rng(std::uint64_t master_seed, std::size_t worker_id) {
  return derive_rng(master_seed, worker_id, kWorkerSalt);
}

WorkerState WorkerState::initial(std::size_t id, const ParamVector& theta0,
                                 const RuleConfig& rule,
                                 std::uint64_t master_seed) {
  WorkerState w;
  w.id = id;
  w.staleness = rule.max_delay;
  w.last_upload_params = theta0;
  w.last_upload_grad = ParamVector(theta0.size());
  w.snapshot = theta0;
  w.stored_innovation = ParamVector(theta0.size());
  w.window = StepNormWindow(rule.d_max);
  w.rng = worker_rng(master_seed, id);
  return w;
}

RoundMessage worker_round(WorkerState& worker, const ParamVector& theta_k,
                          const RuleConfig& rule, const GradientOracle& oracle,
                          std::size_t batch_size, std::size_t k) {
  require_same_size(theta_k, worker.last_upload_grad, "worker_round");
  if (rule.kind == RuleKind::kCada1 && k % rule.max_delay == 0) {
    worker.snapshot = theta_k;
  }

  const Minibatch batch = sample_minibatch(oracle.shard_size(), batch_size, worker.rng);
  ParamVector fresh = oracle.gradient(theta_k, batch);

  RoundMessage msg;
  msg.worker_id = worker.id;
  msg.fresh_grad_norm = l2_norm(fresh);

  ParamVector test_vector;
  ParamVector cada1_innovation;
  switch (rule.kind) {
    case RuleKind::kLag:
    case RuleKind::kAlwaysUpload:
      msg.grad_evals = 1;
      test_vector = fresh - worker.last_upload_grad;
      break;
    case RuleKind::kCada1:
      msg.grad_evals = 2;
      cada1_innovation = fresh - oracle.gradient(worker.snapshot, batch);
      test_vector = cada1_innovation - worker.stored_innovation;
      break;
    case RuleKind::kCada2:
      msg.grad_evals = 2;
      test_vector = fresh - oracle.gradient(worker.last_upload_params, batch);
      break;
  }

  const double threshold = rhs_threshold(rule, worker.window);
  msg.decision = evaluate_rule(rule, test_vector, threshold, worker.staleness);

  if (msg.decision.action == Action::kUpload) {
    msg.innovation = fresh - worker.last_upload_grad;
    worker.staleness = 1;
    worker.last_upload_params = theta_k;
    worker.last_upload_grad = std::move(fresh);
    if (rule.kind == RuleKind::kCada1) {
      worker.stored_innovation = std::move(cada1_innovation);
    }
  } else {
    ++worker.staleness;
  }
  return msg;
}

void worker_observe_step(WorkerState& worker, double sq_step) {
  worker.window.record(sq_step);
}

ServerState ServerState::initial(const ParamVector& theta0) {
  return ServerState{theta0, AdamState::zeros(theta0.size()),
                     ParamVector(theta0.size()), 0};
}

RoundSummary server_round(ServerState& server,
                          std::span<const RoundMessage> messages,
                          std::size_t workers, const AdamConfig& adam,
                          double alpha) {
  if (messages.size() != workers) {
    throw ContractError("server_round: expected " + std::to_string(workers) +
                        " messages, got " + std::to_string(messages.size()));
  }
  RoundSummary summary;
  const double inv_m = 1.0 / static_cast<double>(workers);
  for (std::size_t m = 0; m < messages.size(); ++m) {
    const RoundMessage& msg = messages[m];
    if (msg.worker_id != m) {
      throw ContractError("server_round: messages must be in ascending worker order");
    }
    summary.grad_evals += msg.grad_evals;
    summary.lhs_sum += msg.decision.lhs;
    if (std::isfinite(msg.decision.rhs)) summary.rhs_sum += msg.decision.rhs;
    if (msg.innovation.has_value()) {
      server.aggregate.add_scaled(inv_m, *msg.innovation);
      ++summary.uploads;
      if (msg.decision.forced) ++summary.forced;
    } else {
      ++summary.skips;
    }
  }
  const ParamVector previous = server.theta;
  apply_adam_step(server.adam, adam, server.aggregate, server.theta, alpha);
  summary.sq_step = squared_distance(server.theta, previous);
  ++server.round;
  return summary;
}

ParamVector direct_aggregate(std::span<const WorkerState> workers) {
  ParamVector sum(workers.front().last_upload_grad.size());
  for (const WorkerState& w : workers) sum += w.last_upload_grad;
  sum *= 1.0 / static_cast<double>(workers.size());
  return sum;
}

MetricsLog run_experiment(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  return run_experiment(cfg, problem);
}

MetricsLog run_experiment(const ExperimentConfig& cfg, const Problem& problem,
                          const RoundObserver& observer) {
  cfg.validate();
  if (cfg.algorithm == Algorithm::kLocalMomentum) {
    return run_local_momentum(cfg, problem);
  }
  check_problem(cfg, problem);

  const std::size_t num_workers = cfg.workers;
  const RuleConfig rule = cfg.effective_rule();
  const ParamVector theta0(problem.spec.param_dim());

  std::vector<ShardOracle> oracles;
  std::vector<std::size_t> batch_sizes;
  std::vector<WorkerState> workers;
  for (std::size_t m = 0; m < num_workers; ++m) {
    oracles.emplace_back(problem.spec, problem.shards[m].data);
    batch_sizes.push_back(cfg.batch_size_for(problem.shards[m].data.size()));
    workers.push_back(WorkerState::initial(m, theta0, rule, cfg.seed));
  }
  ServerState server = ServerState::initial(theta0);
  GradNormTracker tracker(num_workers);
  const Evaluator eval{problem.spec, shard_views(problem.shards), cfg.eval_every,
                       cfg.rounds};

  MetricsLog log;
  log.workers = num_workers;
  log.rounds.reserve(cfg.rounds + 1);
  RoundRecord initial;
  eval.fill(initial, server.theta);
  log.rounds.push_back(initial);

  std::vector<RoundMessage> messages(num_workers);
  std::size_t cum_uploads = 0;
  std::size_t cum_evals = 0;
  for (std::size_t k = 0; k < cfg.rounds; ++k) {
    const double alpha = stepsize(cfg.schedule, k);
    const ParamVector& theta_k = server.theta;
    for_each_worker(cfg.threads, num_workers, [&](std::size_t m) {
      messages[m] = worker_round(workers[m], theta_k, rule, oracles[m],
                                 batch_sizes[m], k);
    });
    for (const RoundMessage& msg : messages) {
      tracker.update_norm(msg.worker_id, msg.fresh_grad_norm);
    }

    const ParamVector theta_before = server.theta;
    const RoundSummary summary =
        server_round(server, messages, num_workers, cfg.adam, alpha);
    for (WorkerState& w : workers) worker_observe_step(w, summary.sq_step);

    if (cfg.checked) {
      MonitorSummary& mon = log.monitors;
      ++mon.rounds_checked;
      const MomentumCheck mc = check_momentum_bounds(server.adam, tracker);
      if (!mc.passed) ++mon.momentum_violations;
      mon.max_h_ratio = std::max(mon.max_h_ratio, mc.h_ratio);
      mon.max_v_ratio = std::max(mon.max_v_ratio, mc.v_ratio);
      const StepCheck sc = check_step_bound(server.theta, theta_before, alpha, cfg.adam);
      if (!sc.passed) ++mon.step_violations;
      mon.max_step_ratio = std::max(mon.max_step_ratio, sc.ratio);

      const ParamVector direct = direct_aggregate(workers);
      double err = 0.0;
      double scale = 1.0;
      for (std::size_t i = 0; i < direct.size(); ++i) {
        err = std::max(err, std::abs(direct[i] - server.aggregate[i]));
        scale = std::max(scale, std::abs(direct[i]));
      }
      if (err > kAggregateSlack * scale) ++mon.aggregate_violations;
      mon.max_aggregate_error = std::max(mon.max_aggregate_error, err);
    }

    cum_uploads += summary.uploads;
    cum_evals += summary.grad_evals;
    RoundRecord rec;
    rec.round = k + 1;
    rec.uploads = summary.uploads;
    rec.cum_uploads = cum_uploads;
    rec.cum_grad_evals = cum_evals;
    rec.alpha = alpha;
    rec.skips = summary.skips;
    rec.forced = summary.forced;
    rec.mean_lhs = summary.lhs_sum / static_cast<double>(num_workers);
    rec.mean_rhs = summary.rhs_sum / static_cast<double>(num_workers);
    if (eval.due(rec.round)) eval.fill(rec, server.theta);
    log.rounds.push_back(std::move(rec));

    if (observer) observer(server, workers);
  }
  log.final_theta = server.theta;
  return log;
}

MetricsLog run_local_momentum(const ExperimentConfig& cfg, const Problem& problem,
                              const LocalObserver& observer) {
  cfg.validate();
  check_problem(cfg, problem);

  const std::size_t num_workers = cfg.workers;
  const std::size_t p = problem.spec.param_dim();
  std::vector<ParamVector> thetas(num_workers, ParamVector(p));
  std::vector<MomentumState> velocity(num_workers, MomentumState{ParamVector(p)});
  std::vector<Rng> rngs;
  std::vector<std::size_t> batch_sizes;
  for (std::size_t m = 0; m < num_workers; ++m) {
    rngs.push_back(worker_rng(cfg.seed, m));
    batch_sizes.push_back(cfg.batch_size_for(problem.shards[m].data.size()));
  }
  const Evaluator eval{problem.spec, shard_views(problem.shards), cfg.eval_every,
                       cfg.rounds};

  MetricsLog log;
  log.workers = num_workers;
  log.rounds.reserve(cfg.rounds + 1);
  RoundRecord initial;
  eval.fill(initial, mean_of(thetas));
  log.rounds.push_back(initial);

  std::size_t cum_uploads = 0;
  std::size_t cum_evals = 0;
  for (std::size_t k = 0; k < cfg.rounds; ++k) {
    const double alpha = stepsize(cfg.schedule, k);
    for_each_worker(cfg.threads, num_workers, [&](std::size_t m) {
      const Dataset& data = problem.shards[m].data;
      const Minibatch batch = sample_minibatch(data.size(), batch_sizes[m], rngs[m]);
      const ParamVector g = gradient(problem.spec, data, thetas[m], batch);
      apply_momentum_sgd_step(velocity[m], g, thetas[m], alpha, cfg.momentum);
    });
    cum_evals += num_workers;

    RoundRecord rec;
    rec.round = k + 1;
    rec.alpha = alpha;
    if ((k + 1) % cfg.averaging_interval == 0) {
      const ParamVector mean = mean_of(thetas);
      for (ParamVector& t : thetas) t = mean;
      rec.uploads = num_workers;
    } else {
      rec.skips = num_workers;
    }
    cum_uploads += rec.uploads;
    rec.cum_uploads = cum_uploads;
    rec.cum_grad_evals = cum_evals;
    if (eval.due(rec.round)) eval.fill(rec, mean_of(thetas));
    log.rounds.push_back(std::move(rec));

    if (observer) observer(k, thetas);
  }
  log.final_theta = mean_of(thetas);
  return log;
}

}  // namespace cadasim
