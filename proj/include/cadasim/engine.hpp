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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cadasim/commrules.hpp"
#include "cadasim/dataio.hpp"
#include "cadasim/diagnostics.hpp"
#include "cadasim/numerics.hpp"
#include "cadasim/optimizer.hpp"
#include "cadasim/problems.hpp"
#include "cadasim/random.hpp"

namespace cadasim {

enum class Algorithm { kAdam, kLag, kCada1, kCada2, kLocalMomentum };

const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

enum class DataSource { kSynthetic, kLibsvm };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::kBinaryLogistic;
  double lambda = kDefaultLambda;
  DataSource source = DataSource::kSynthetic;
  std::string path;                  // libsvm only
  std::size_t p = 20;                // synthetic feature dimension
  std::size_t n = 2000;              // synthetic sample count
  std::size_t classes = 3;           // synthetic multiclass only
  double heterogeneity = 0.0;        // synthetic logistic only
  double cond = 10.0;                // quadratic only
  double noise = 0.1;                // quadratic only
  std::optional<std::uint64_t> seed;  // data seed, defaults to the master seed
  PartitionKind partition = PartitionKind::kUniform;  // libsvm and quadratic

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::size_t workers = 1;
  std::optional<std::size_t> batch_size;  // overrides batch_ratio
  double batch_ratio = 0.01;
  Algorithm algorithm = Algorithm::kCada2;
  RuleConfig rule;  // rule.kind is derived from algorithm
  AdamConfig adam;
  double momentum = 0.9;  // local_momentum only
  StepSchedule schedule;
  std::size_t rounds = 0;
  std::size_t averaging_interval = 10;  // H, local_momentum only
  std::size_t eval_every = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool checked = true;
  std::string output;

  RuleConfig effective_rule() const;
  std::size_t batch_size_for(std::size_t shard_size) const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct Problem {
  ProblemSpec spec;
  std::vector<Shard> shards;
  std::optional<ParamVector> minimizer;  // quadratic only
};

Problem build_problem(const ExperimentConfig& cfg);

// Stochastic gradient access for one worker's local data.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual std::size_t shard_size() const = 0;
  virtual std::size_t dim() const = 0;
  virtual ParamVector gradient(const ParamVector& theta,
                               const Minibatch& batch) const = 0;
};

class ShardOracle final : public GradientOracle {
 public:
  ShardOracle(const ProblemSpec& spec, const Dataset& data)
      : spec_(&spec), data_(&data) {}

  std::size_t shard_size() const override { return data_->size(); }
  std::size_t dim() const override { return spec_->param_dim(); }
  ParamVector gradient(const ParamVector& theta,
                       const Minibatch& batch) const override {
    return cadasim::gradient(*spec_, *data_, theta, batch);
  }

 private:
  const ProblemSpec* spec_;
  const Dataset* data_;
};

struct WorkerState {
  std::size_t id = 0;
  std::size_t staleness = 1;        // tau
  ParamVector last_upload_params;   // theta^{k - tau}
  ParamVector last_upload_grad;     // gradient the server currently holds
  ParamVector snapshot;             // CADA1 theta-tilde
  ParamVector stored_innovation;    // CADA1 delta-tilde at the last upload
  StepNormWindow window{1};
  Rng rng;

  // tau = D, zero stored gradients, snapshot = theta0: round 0 is a forced
  // fresh upload from every worker.
  static WorkerState initial(std::size_t id, const ParamVector& theta0,
                             const RuleConfig& rule, std::uint64_t master_seed);
};

// Per-worker minibatch stream; fixed function of (master seed, worker id).
Rng worker_rng(std::uint64_t master_seed, std::size_t worker_id);

struct RoundMessage {
  std::size_t worker_id = 0;
  std::optional<ParamVector> innovation;  // delta = g - last_upload_grad
  std::size_t grad_evals = 0;
  Decision decision;
  double fresh_grad_norm = 0.0;
};

// One worker's part of round k: sample a minibatch, compute the fresh
// gradient g (plus the rule's second gradient for CADA), test the rule
// and either upload delta or skip.
RoundMessage worker_round(WorkerState& worker, const ParamVector& theta_k,
                          const RuleConfig& rule, const GradientOracle& oracle,
                          std::size_t batch_size, std::size_t k);

// Records |theta^{k+1} - theta^k|^2 after the server step.
void worker_observe_step(WorkerState& worker, double sq_step);

struct ServerState {
  ParamVector theta;
  AdamState adam;
  ParamVector aggregate;  // (1/M) sum of the workers' held gradients
  std::size_t round = 0;

  static ServerState initial(const ParamVector& theta0);
};

struct RoundSummary {
  std::size_t uploads = 0;
  std::size_t skips = 0;
  std::size_t forced = 0;
  std::size_t grad_evals = 0;
  double lhs_sum = 0.0;
  double rhs_sum = 0.0;
  double sq_step = 0.0;
};

// Applies the messages in ascending worker order to the aggregate, then
// takes one Adam step. Expects exactly one message per worker.
RoundSummary server_round(ServerState& server,
                          std::span<const RoundMessage> messages,
                          std::size_t workers, const AdamConfig& adam,
                          double alpha);

// (1/M) sum_m last_upload_grad_m, recomputed from scratch.
ParamVector direct_aggregate(std::span<const WorkerState> workers);

// Called after every completed round.
using RoundObserver =
    std::function<void(const ServerState&, std::span<const WorkerState>)>;
// Called after every local-momentum round with each worker's parameters.
using LocalObserver =
    std::function<void(std::size_t round, std::span<const ParamVector>)>;

// Runs the configured algorithm (dispatches local_momentum too).
MetricsLog run_experiment(const ExperimentConfig& cfg);
MetricsLog run_experiment(const ExperimentConfig& cfg, const Problem& problem,
                          const RoundObserver& observer = {});

MetricsLog run_local_momentum(const ExperimentConfig& cfg, const Problem& problem,
                              const LocalObserver& observer = {});

}  // namespace cadasim
