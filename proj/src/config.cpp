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
#include "cadasim/config.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cadasim/errors.hpp"

namespace cadasim {
namespace {

using nlohmann::json;

// Typed field access on one JSON object that remembers which keys were
// read, so leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required field '" + path(key) + "'");
    return obj_.at(key);
  }

  double real(const std::string& key, double fallback) {
    return has(key) ? as_real(obj_.at(key), key) : fallback;
  }
  double real(const std::string& key) { return as_real(at(key), key); }

  std::size_t count(const std::string& key, std::size_t fallback) {
    return has(key) ? as_count(obj_.at(key), key) : fallback;
  }
  std::size_t count(const std::string& key) { return as_count(at(key), key); }

  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? as_text(obj_.at(key), key) : fallback;
  }
  std::string text(const std::string& key) { return as_text(at(key), key); }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError("'" + path(key) + "' must be a boolean");
    return v.get<bool>();
  }

  void reject_unknown() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown field '" + path(item.key()) + "'");
      }
    }
  }

  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

 private:
  double as_real(const json& v, const std::string& key) const {
    if (!v.is_number()) throw ConfigError("'" + path(key) + "' must be a number");
    return v.get<double>();
  }
  std::size_t as_count(const json& v, const std::string& key) const {
    if (!v.is_number_unsigned()) {
      throw ConfigError("'" + path(key) + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  std::string as_text(const json& v, const std::string& key) const {
    if (!v.is_string()) throw ConfigError("'" + path(key) + "' must be a string");
    return v.get<std::string>();
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

ProblemConfig read_problem(const json& obj) {
  Fields f(obj, "problem");
  ProblemConfig pc;
  pc.kind = problem_kind_from_string(f.text("kind"));
  pc.lambda = f.real("lambda", pc.lambda);
  const std::string source = f.text("source", "synthetic");
  if (source == "synthetic") {
    pc.source = DataSource::kSynthetic;
  } else if (source == "libsvm") {
    pc.source = DataSource::kLibsvm;
    pc.path = f.text("path");
  } else {
    throw ConfigError("unknown problem.source '" + source + "'");
  }
  if (pc.source == DataSource::kSynthetic && f.has("path")) {
    throw ConfigError("problem.path is only valid with source \"libsvm\"");
  }
  pc.p = f.count("p", pc.p);
  pc.n = f.count("n", pc.n);
  pc.classes = f.count("classes", pc.classes);
  pc.heterogeneity = f.real("heterogeneity", pc.heterogeneity);
  pc.cond = f.real("cond", pc.cond);
  pc.noise = f.real("noise", pc.noise);
  if (f.has("seed")) pc.seed = f.count("seed");
  const std::string part = f.text("partition", "uniform");
  if (part == "uniform") {
    pc.partition = PartitionKind::kUniform;
  } else if (part == "random_sizes") {
    pc.partition = PartitionKind::kRandomSizes;
  } else {
    throw ConfigError("unknown problem.partition '" + part + "'");
  }
  f.reject_unknown();
  return pc;
}

RuleConfig read_rule(const json& obj) {
  Fields f(obj, "rule");
  RuleConfig r;
  if (f.has("c")) {
    const json& c = obj.at("c");
    if (c.is_string() && c.get<std::string>() == "inf") {
      r.c = kSkipUnlessForced;
    } else {
      r.c = f.real("c");
    }
  }
  r.d_max = f.count("d_max", r.d_max);
  r.max_delay = f.count("D", r.max_delay);
  f.reject_unknown();
  return r;
}

AdamConfig read_adam(const json& obj) {
  Fields f(obj, "adam");
  AdamConfig a;
  a.beta1 = f.real("beta1", a.beta1);
  a.beta2 = f.real("beta2", a.beta2);
  a.epsilon = f.real("epsilon", a.epsilon);
  f.reject_unknown();
  return a;
}

StepSchedule read_schedule(const json& obj) {
  Fields f(obj, "schedule");
  const ScheduleKind kind = schedule_kind_from_string(f.text("kind"));
  StepSchedule s;
  switch (kind) {
    case ScheduleKind::kConstant:
      s = StepSchedule::constant(f.real("alpha"));
      break;
    case ScheduleKind::kSqrtHorizon:
      s = StepSchedule::sqrt_horizon(f.real("eta"), f.count("horizon"));
      break;
    case ScheduleKind::kPlInverse:
      s = StepSchedule::pl_inverse(f.real("mu"), f.real("k0"));
      break;
  }
  f.reject_unknown();
  return s;
}

}  // namespace

ExperimentConfig load_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Fields f(doc, "");
  ExperimentConfig cfg;
  cfg.problem = read_problem(f.at("problem"));
  cfg.workers = f.count("workers");
  if (f.has("batch_size")) cfg.batch_size = f.count("batch_size");
  cfg.batch_ratio = f.real("batch_ratio", cfg.batch_ratio);
  cfg.algorithm = algorithm_from_string(f.text("algorithm"));
  if (f.has("rule")) cfg.rule = read_rule(doc.at("rule"));
  if (f.has("adam")) cfg.adam = read_adam(doc.at("adam"));
  cfg.momentum = f.real("momentum", cfg.momentum);
  cfg.schedule = read_schedule(f.at("schedule"));
  cfg.rounds = f.count("rounds");
  cfg.averaging_interval = f.count("H", cfg.averaging_interval);
  cfg.eval_every = f.count("eval_every", cfg.eval_every);
  cfg.seed = f.count("seed", cfg.seed);
  cfg.threads = f.count("threads", cfg.threads);
  cfg.checked = f.flag("checked", cfg.checked);
  cfg.output = f.text("output", cfg.output);
  f.reject_unknown();
  cfg.rule.kind = cfg.effective_rule().kind;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json problem = {
      {"kind", to_string(cfg.problem.kind)},
      {"lambda", cfg.problem.lambda},
      {"source", cfg.problem.source == DataSource::kSynthetic ? "synthetic" : "libsvm"},
      {"p", cfg.problem.p},
      {"n", cfg.problem.n},
      {"classes", cfg.problem.classes},
      {"heterogeneity", cfg.problem.heterogeneity},
      {"cond", cfg.problem.cond},
      {"noise", cfg.problem.noise},
      {"partition", cfg.problem.partition == PartitionKind::kUniform ? "uniform"
                                                                     : "random_sizes"},
  };
  if (cfg.problem.source == DataSource::kLibsvm) problem["path"] = cfg.problem.path;
  if (cfg.problem.seed.has_value()) problem["seed"] = *cfg.problem.seed;

  json rule = {{"d_max", cfg.rule.d_max}, {"D", cfg.rule.max_delay}};
  if (std::isinf(cfg.rule.c)) {
    rule["c"] = "inf";
  } else {
    rule["c"] = cfg.rule.c;
  }

  json schedule = {{"kind", to_string(cfg.schedule.kind)}};
  switch (cfg.schedule.kind) {
    case ScheduleKind::kConstant:
      schedule["alpha"] = cfg.schedule.alpha;
      break;
    case ScheduleKind::kSqrtHorizon:
      schedule["eta"] = cfg.schedule.eta;
      schedule["horizon"] = cfg.schedule.horizon;
      break;
    case ScheduleKind::kPlInverse:
      schedule["mu"] = cfg.schedule.mu;
      schedule["k0"] = cfg.schedule.k0;
      break;
  }

  json doc = {
      {"problem", problem},
      {"workers", cfg.workers},
      {"batch_ratio", cfg.batch_ratio},
      {"algorithm", to_string(cfg.algorithm)},
      {"rule", rule},
      {"adam",
       {{"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"epsilon", cfg.adam.epsilon}}},
      {"momentum", cfg.momentum},
      {"schedule", schedule},
      {"rounds", cfg.rounds},
      {"H", cfg.averaging_interval},
      {"eval_every", cfg.eval_every},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"checked", cfg.checked},
      {"output", cfg.output},
  };
  if (cfg.batch_size.has_value()) doc["batch_size"] = *cfg.batch_size;
  return doc.dump(2) + "\n";
}

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const RoundRecord& r : log.rounds) {
    out << r.round << ',';
    if (r.loss) out << format_shortest(*r.loss);
    out << ',';
    if (r.grad_norm_sq) out << format_shortest(*r.grad_norm_sq);
    out << ',' << r.uploads << ',' << r.cum_uploads << ',' << r.cum_grad_evals << ','
        << format_shortest(r.alpha) << '\n';
  }
  if (!out) throw std::ios_base::failure("failed writing metrics CSV");
}

}  // namespace cadasim
