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
// Command-line driver: run experiments, generate synthetic LIBSVM data and
// check analytic gradients against finite differences.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cadasim/config.hpp"
#include "cadasim/dataio.hpp"
#include "cadasim/diagnostics.hpp"
#include "cadasim/engine.hpp"
#include "cadasim/random.hpp"

namespace {

using namespace cadasim;

int cmd_run(const std::string& config_path, std::string out_path,
            std::optional<std::size_t> threads) {
  ExperimentConfig cfg = load_config_file(config_path);
  if (threads) cfg.threads = *threads;
  if (out_path.empty()) out_path = cfg.output;
  const MetricsLog log = run_experiment(cfg);

  if (out_path.empty() || out_path == "-") {
    write_metrics_csv(log, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    write_metrics_csv(log, out);
  }

  const RoundRecord& last = log.rounds.back();
  std::cerr << to_string(cfg.algorithm) << ": rounds=" << cfg.rounds
            << " uploads=" << log.total_uploads() << "/" << cfg.rounds * cfg.workers
            << " grad_evals=" << last.cum_grad_evals;
  if (last.loss) std::cerr << " final_loss=" << format_shortest(*last.loss);
  if (cfg.checked && cfg.algorithm != Algorithm::kLocalMomentum) {
    std::cerr << " monitor_violations=" << log.monitors.total_violations();
  }
  std::cerr << '\n';
  return 0;
}

struct GenOptions {
  std::string config;
  std::string kind = "binary_logistic";
  std::size_t p = 20;
  std::size_t n = 2000;
  std::size_t workers = 1;
  std::size_t classes = 3;
  double heterogeneity = 0.0;
  double cond = 10.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenOptions& opt) {
  Dataset data;
  if (!opt.config.empty()) {
    const ExperimentConfig cfg = load_config_file(opt.config);
    data = concatenate(build_problem(cfg).shards);
  } else {
    switch (problem_kind_from_string(opt.kind)) {
      case ProblemKind::kBinaryLogistic:
        data = concatenate(gen_synthetic_logreg(opt.p, opt.n, opt.workers, opt.seed,
                                                opt.heterogeneity));
        break;
      case ProblemKind::kMulticlassLogistic:
        data = concatenate(gen_synthetic_multiclass(opt.p, opt.n, opt.workers,
                                                    opt.classes, opt.seed,
                                                    opt.heterogeneity));
        break;
      case ProblemKind::kQuadratic:
        data = gen_quadratic(opt.p, opt.n, opt.seed, opt.cond).data;
        break;
    }
  }
  if (opt.out.empty() || opt.out == "-") {
    write_libsvm(std::cout, data);
  } else {
    std::ofstream out(opt.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + opt.out + "' for writing");
    write_libsvm(out, data);
  }
  std::cerr << "wrote " << data.size() << " samples of dimension " << data.dim << '\n';
  return 0;
}

int cmd_grad_check(const std::string& config_path, std::size_t points, double h,
                   double tolerance) {
  const ExperimentConfig cfg = load_config_file(config_path);
  const Problem problem = build_problem(cfg);
  const Dataset& data = problem.shards.front().data;
  Rng rng = derive_rng(cfg.seed, 0, 0x4752414443484bULL);

  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    ParamVector theta(problem.spec.param_dim());
    for (double& x : theta) x = standard_normal(rng);
    const Minibatch batch =
        sample_minibatch(data.size(), cfg.batch_size_for(data.size()), rng);
    worst = std::max(worst, finite_diff_gradcheck(problem.spec, data, theta, batch, h));
  }
  const bool ok = worst <= tolerance;
  std::cout << "grad-check " << to_string(problem.spec.kind) << ": points=" << points
            << " max_rel_error=" << format_shortest(worst) << (ok ? " PASS" : " FAIL")
            << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-based simulator for communication-adaptive distributed Adam"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_out;
  std::optional<std::size_t> run_threads;
  auto* run = app.add_subcommand("run", "Run one experiment and write its metrics CSV");
  run->add_option("--config", run_config, "Experiment JSON")->required();
  run->add_option("--out", run_out, "CSV destination ('-' for stdout)");
  run->add_option("--threads", run_threads, "Override the worker thread count");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset in LIBSVM format");
  gen_cmd->add_option("--config", gen.config, "Take the problem section from a config");
  gen_cmd->add_option("--kind", gen.kind, "binary_logistic|multiclass_logistic|quadratic");
  gen_cmd->add_option("--p", gen.p, "Feature dimension");
  gen_cmd->add_option("--n", gen.n, "Sample count");
  gen_cmd->add_option("--workers", gen.workers, "Workers (for heterogeneous shifts)");
  gen_cmd->add_option("--classes", gen.classes, "Classes (multiclass)");
  gen_cmd->add_option("--heterogeneity", gen.heterogeneity, "Mean-shift strength in [0,1]");
  gen_cmd->add_option("--cond", gen.cond, "Hessian condition number (quadratic)");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--out", gen.out, "Output path ('-' for stdout)");

  std::string gc_config;
  std::size_t gc_points = 20;
  double gc_h = 1e-6;
  double gc_tol = 1e-5;
  auto* gc = app.add_subcommand("grad-check", "Compare analytic and finite-difference gradients");
  gc->add_option("--config", gc_config, "Experiment JSON")->required();
  gc->add_option("--points", gc_points, "Random parameter points");
  gc->add_option("--step", gc_h, "Central-difference step");
  gc->add_option("--tol", gc_tol, "Maximum accepted relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_config, run_out, run_threads);
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*gc) return cmd_grad_check(gc_config, gc_points, gc_h, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
