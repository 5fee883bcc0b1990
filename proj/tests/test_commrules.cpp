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
#include <cmath>

#include "doctest.h"

#include "cadasim/commrules.hpp"
#include "cadasim/errors.hpp"
#include "cadasim/random.hpp"

using namespace cadasim;

namespace {

StepNormWindow window_of(std::size_t cap, std::initializer_list<double> oldest_first) {
  StepNormWindow w(cap);
  for (double x : oldest_first) w.record(x);
  return w;
}

RuleConfig rule(RuleKind kind, double c, std::size_t d_max, std::size_t d) {
  RuleConfig r;
  r.kind = kind;
  r.c = c;
  r.d_max = d_max;
  r.max_delay = d;
  return r;
}

}  // namespace

TEST_CASE("rhs_threshold examples") {
  CHECK(rhs_threshold(rule(RuleKind::kCada2, 1.0, 2, 100), window_of(2, {0.03, 0.01})) ==
        doctest::Approx(0.02));
  CHECK(rhs_threshold(rule(RuleKind::kCada2, 0.0, 2, 100), window_of(2, {5.0, 7.0})) == 0.0);
  // One round of history; the other nine slots count as zero.
  CHECK(rhs_threshold(rule(RuleKind::kCada1, 10.0, 10, 100), window_of(10, {0.04})) ==
        doctest::Approx(0.04));
  CHECK(rhs_threshold(rule(RuleKind::kCada1, 10.0, 10, 100), StepNormWindow(10)) == 0.0);
  CHECK(std::isinf(rhs_threshold(rule(RuleKind::kLag, kSkipUnlessForced, 3, 10),
                                 StepNormWindow(3))));
  CHECK_THROWS_AS(rhs_threshold(rule(RuleKind::kLag, 1.0, 3, 10), StepNormWindow(4)),
                  ContractError);
}

TEST_CASE("evaluate_rule examples") {
  const RuleConfig r = rule(RuleKind::kCada2, 1.0, 10, 100);
  const Decision skip = evaluate_rule(r, ParamVector{0.1, 0.0}, 0.02, 3);
  CHECK(skip.action == Action::kSkip);
  CHECK(skip.lhs == doctest::Approx(0.01));
  CHECK(skip.rhs == 0.02);
  CHECK_FALSE(skip.forced);

  const Decision forced = evaluate_rule(r, ParamVector{0.0, 0.0}, 1e9, 100);
  CHECK(forced.action == Action::kUpload);
  CHECK(forced.forced);

  const Decision up = evaluate_rule(r, ParamVector{0.3}, 0.02, 1);
  CHECK(up.action == Action::kUpload);
  CHECK(up.lhs == doctest::Approx(0.09));
  CHECK_FALSE(up.forced);

  CHECK(evaluate_rule(r, ParamVector{0.5}, 0.25, 1).action == Action::kSkip);  // tie skips
  CHECK(evaluate_rule(rule(RuleKind::kAlwaysUpload, 1.0, 10, 100), ParamVector{0.0}, 1.0, 5)
            .action == Action::kUpload);
}

TEST_CASE("evaluate_rule contract errors") {
  const RuleConfig r = rule(RuleKind::kLag, 1.0, 10, 100);
  CHECK_THROWS_AS(evaluate_rule(r, ParamVector{0.1}, -1e-9, 1), ContractError);
  CHECK_THROWS_AS(evaluate_rule(r, ParamVector{0.1}, std::nan(""), 1), ContractError);
  CHECK_THROWS_AS(evaluate_rule(r, ParamVector{0.1}, 1.0, 0), ContractError);
}

TEST_CASE("rule properties over random inputs") {
  Rng rng(31);
  for (int t = 0; t < 500; ++t) {
    const std::size_t p = 1 + uniform_index(rng, 6);
    const std::size_t d = 1 + uniform_index(rng, 8);
    const std::size_t staleness = 1 + uniform_index(rng, 10);
    const RuleKind kind = t % 3 == 0 ? RuleKind::kLag
                          : t % 3 == 1 ? RuleKind::kCada1
                                       : RuleKind::kCada2;
    ParamVector inn(p);
    for (double& x : inn) x = uniform_unit(rng) < 0.2 ? 0.0 : standard_normal(rng);
    const double threshold = uniform_unit(rng) < 0.2 ? 0.0 : uniform_unit(rng) * 3.0;

    const Decision dec = evaluate_rule(rule(kind, 1.0, 4, d), inn, threshold, staleness);
    if (dec.action == Action::kSkip) {
      CHECK(staleness < d);
      CHECK_FALSE(dec.forced);
      CHECK(dec.lhs <= dec.rhs);
    }
    if (threshold == 0.0 && dec.action == Action::kSkip) CHECK(dec.lhs == 0.0);

    // Power-of-two scaling keeps both sides exact.
    const double s = std::ldexp(1.0, static_cast<int>(uniform_index(rng, 20)) - 10);
    const Decision scaled =
        evaluate_rule(rule(kind, 1.0, 4, d), s * inn, s * s * threshold, staleness);
    CHECK(scaled.action == dec.action);
  }
}
