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
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "cadasim/dataio.hpp"
#include "cadasim/errors.hpp"
#include "cadasim/problems.hpp"

using namespace cadasim;

namespace {

Sample dense_sample(std::vector<double> x, double label) {
  Sample s;
  s.label = label;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) s.features.push_back(Feature{static_cast<std::uint32_t>(j), x[j]});
  }
  return s;
}

Minibatch everything(const Dataset& d) {
  Minibatch b;
  for (std::size_t i = 0; i < d.size(); ++i) b.indices.push_back(i);
  return b;
}

ParamVector random_theta(std::size_t p, Rng& rng, double scale = 1.0) {
  ParamVector t(p);
  for (double& x : t) x = scale * standard_normal(rng);
  return t;
}

// Central differences computed here, independent of the diagnostics module.
double fd_relative_error(const ProblemSpec& spec, const Dataset& data,
                         const ParamVector& theta, const Minibatch& batch) {
  const double h = 1e-6;
  const ParamVector g = gradient(spec, data, theta, batch);
  double worst = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    ParamVector up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    const double fd = (loss(spec, data, up, batch) - loss(spec, data, down, batch)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
  }
  return worst;
}

Dataset random_dataset(std::size_t n, std::size_t dim, ProblemKind kind,
                       std::size_t classes, Rng& rng) {
  Dataset d;
  d.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    for (std::size_t j = 0; j < dim; ++j) {
      if (uniform_unit(rng) < 0.7) {
        s.features.push_back(Feature{static_cast<std::uint32_t>(j), standard_normal(rng)});
      }
    }
    switch (kind) {
      case ProblemKind::kBinaryLogistic: s.label = uniform_unit(rng) < 0.5 ? -1.0 : 1.0; break;
      case ProblemKind::kMulticlassLogistic:
        s.label = static_cast<double>(uniform_index(rng, classes));
        break;
      case ProblemKind::kQuadratic: s.label = standard_normal(rng); break;
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace

TEST_CASE("binary logistic loss examples") {
  ProblemSpec spec{ProblemKind::kBinaryLogistic, 2, 0.0, 2};
  Dataset one;
  one.dim = 2;
  one.samples.push_back(dense_sample({1.0, 0.0}, 1.0));
  CHECK(full_loss(spec, one, ParamVector{0.0, 0.0}) == doctest::Approx(std::log(2.0)));
  // ln(1 + e^-1)
  CHECK(full_loss(spec, one, ParamVector{1.0, 0.0}) ==
        doctest::Approx(0.31326168751822286).epsilon(1e-14));

  Rng rng(1);
  const Dataset many = random_dataset(17, 2, ProblemKind::kBinaryLogistic, 2, rng);
  CHECK(full_loss(spec, many, ParamVector{0.0, 0.0}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("quadratic loss is a mean over samples") {
  ProblemSpec spec{ProblemKind::kQuadratic, 2, 0.0, 2};
  Dataset id;
  id.dim = 2;
  id.samples.push_back(dense_sample({1.0, 0.0}, 0.0));
  id.samples.push_back(dense_sample({0.0, 1.0}, 0.0));
  // (0.5 * 9 + 0.5 * 16) / 2
  CHECK(full_loss(spec, id, ParamVector{3.0, 4.0}) == doctest::Approx(6.25));
}

TEST_CASE("binary logistic gradient closed form") {
  ProblemSpec spec{ProblemKind::kBinaryLogistic, 2, 0.0, 2};
  Dataset one;
  one.dim = 2;
  one.samples.push_back(dense_sample({1.0, 0.0}, 1.0));
  const ParamVector g = full_gradient(spec, one, ParamVector{1.0, 0.0});
  // -sigma(-1)
  CHECK(g[0] == doctest::Approx(-0.2689414213699951).epsilon(1e-14));
  CHECK(g[1] == 0.0);
}

TEST_CASE("quadratic gradient vanishes at the generated minimizer") {
  for (double lambda : {0.0, 1e-5, 0.3}) {
    const QuadraticProblem q = gen_quadratic(8, 200, 5, 20.0, 0.2, lambda);
    CHECK(l2_norm(full_gradient(q.spec, q.data, q.minimizer)) <= 1e-10);
  }
}

TEST_CASE("gradients agree with central finite differences at 20 points") {
  Rng rng(99);
  struct Case {
    ProblemKind kind;
    std::size_t classes;
  };
  for (const Case c : {Case{ProblemKind::kBinaryLogistic, 2},
                       Case{ProblemKind::kMulticlassLogistic, 3},
                       Case{ProblemKind::kQuadratic, 2}}) {
    CAPTURE(to_string(c.kind));
    ProblemSpec spec{c.kind, c.classes, 1e-3, 6};
    const Dataset data = random_dataset(40, 6, c.kind, c.classes, rng);
    for (int point = 0; point < 20; ++point) {
      const ParamVector theta = random_theta(spec.param_dim(), rng);
      Minibatch batch;
      batch = sample_minibatch(data.size(), 1 + uniform_index(rng, 10), rng);
      CHECK(fd_relative_error(spec, data, theta, batch) <= 1e-5);
    }
  }
}

TEST_CASE("regularizer vanishes at zero") {
  Rng rng(2);
  for (ProblemKind kind : {ProblemKind::kBinaryLogistic, ProblemKind::kQuadratic}) {
    const Dataset data = random_dataset(10, 4, kind, 2, rng);
    ProblemSpec with{kind, 2, 0.5, 4};
    ProblemSpec without{kind, 2, 0.0, 4};
    CHECK(full_loss(with, data, ParamVector(4)) == full_loss(without, data, ParamVector(4)));
  }
}

TEST_CASE("regularizer adds lambda/2 |theta|^2 and lambda theta") {
  ProblemSpec spec{ProblemKind::kQuadratic, 2, 0.2, 2};
  Dataset zero_rows;
  zero_rows.dim = 2;
  zero_rows.samples.push_back(dense_sample({0.0, 0.0}, 0.0));
  const ParamVector t{1.0, -2.0};
  CHECK(full_loss(spec, zero_rows, t) == doctest::Approx(0.1 * 5.0));
  const ParamVector g = full_gradient(spec, zero_rows, t);
  CHECK(g[0] == doctest::Approx(0.2));
  CHECK(g[1] == doctest::Approx(-0.4));
}

TEST_CASE("multiclass loss at zero is ln C") {
  Rng rng(4);
  for (std::size_t classes : {2u, 3u, 7u}) {
    ProblemSpec spec{ProblemKind::kMulticlassLogistic, classes, 1e-5, 5};
    const Dataset data = random_dataset(25, 5, spec.kind, classes, rng);
    CHECK(full_loss(spec, data, ParamVector(spec.param_dim())) ==
          doctest::Approx(std::log(static_cast<double>(classes))));
  }
}

TEST_CASE("multiclass layout is class-major") {
  ProblemSpec spec{ProblemKind::kMulticlassLogistic, 3, 0.0, 2};
  Dataset d;
  d.dim = 2;
  d.samples.push_back(dense_sample({1.0, 0.0}, 2.0));
  // Only feature 0 is present, so only coordinates c*2 + 0 move.
  const ParamVector g = full_gradient(spec, d, ParamVector(6));
  CHECK(g[0] == doctest::Approx(1.0 / 3.0));
  CHECK(g[2] == doctest::Approx(1.0 / 3.0));
  CHECK(g[4] == doctest::Approx(-2.0 / 3.0));
  CHECK(g[1] == 0.0);
  CHECK(g[3] == 0.0);
  CHECK(g[5] == 0.0);
}

TEST_CASE("logistic loss is stable for large margins") {
  ProblemSpec spec{ProblemKind::kBinaryLogistic, 2, 0.0, 1};
  Dataset d;
  d.dim = 1;
  d.samples.push_back(dense_sample({1.0}, 1.0));
  CHECK(full_loss(spec, d, ParamVector{-800.0}) == doctest::Approx(800.0));
  CHECK(full_loss(spec, d, ParamVector{800.0}) >= 0.0);
  CHECK(full_gradient(spec, d, ParamVector{-800.0})[0] == doctest::Approx(-1.0));
}

TEST_CASE("dimension and label errors") {
  ProblemSpec spec{ProblemKind::kBinaryLogistic, 2, 0.0, 2};
  Dataset d;
  d.dim = 2;
  d.samples.push_back(dense_sample({1.0, 1.0}, 1.0));
  CHECK_THROWS_AS(full_loss(spec, d, ParamVector{1.0}), ContractError);
  CHECK_THROWS_AS(gradient(spec, d, ParamVector{1.0, 1.0}, Minibatch{}), ContractError);
  CHECK_THROWS_AS(gradient(spec, d, ParamVector{1.0, 1.0}, Minibatch{{3}}), ContractError);

  d.samples[0].label = 0.0;
  CHECK_THROWS_AS(validate_dataset(spec, d), ContractError);
  ProblemSpec mc{ProblemKind::kMulticlassLogistic, 3, 0.0, 2};
  d.samples[0].label = 3.0;
  CHECK_THROWS_AS(validate_dataset(mc, d), ContractError);
  d.samples[0].label = 1.5;
  CHECK_THROWS_AS(validate_dataset(mc, d), ContractError);
  ProblemSpec neg{ProblemKind::kQuadratic, 2, -1.0, 2};
  CHECK_THROWS_AS(neg.validate(), ContractError);
}

TEST_CASE("sample_minibatch examples") {
  Rng rng(11);
  const Minibatch all = sample_minibatch(5, 5, rng);
  CHECK(std::set<std::size_t>(all.indices.begin(), all.indices.end()) ==
        std::set<std::size_t>{0, 1, 2, 3, 4});

  CHECK(sample_minibatch(1, 1, rng).indices == std::vector<std::size_t>{0});

  Rng a(123), b(123);
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_minibatch(1000, 7, a).indices == sample_minibatch(1000, 7, b).indices);
    CHECK(sample_minibatch(50, 40, a).indices == sample_minibatch(50, 40, b).indices);
  }

  CHECK_THROWS_AS(sample_minibatch(5, 0, rng), ContractError);
  CHECK_THROWS_AS(sample_minibatch(5, 6, rng), ContractError);
}

TEST_CASE("sample_minibatch draws distinct, roughly uniform indices") {
  Rng rng(5);
  std::vector<int> hits(20, 0);
  for (int t = 0; t < 4000; ++t) {
    const Minibatch b = sample_minibatch(20, 2, rng);
    CHECK(b.indices[0] != b.indices[1]);
    for (std::size_t i : b.indices) ++hits[i];
  }
  // Each index expects 400 hits; sd ~ 19.
  for (int h : hits) CHECK(std::abs(h - 400) < 100);
}

TEST_CASE("quadratic satisfies the PL inequality with the Hessian's smallest eigenvalue") {
  const QuadraticProblem q = gen_quadratic(6, 300, 21, 12.0, 0.5, 0.0);
  const std::size_t p = 6;
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(p, p);
  for (const Sample& s : q.data.samples) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    for (const Feature& f : s.features) a(f.index) = f.value;
    hessian += a * a.transpose();
  }
  hessian /= static_cast<double>(q.data.size());
  const double mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian).eigenvalues()(0);
  REQUIRE(mu > 0.0);

  const double best = full_loss(q.spec, q.data, q.minimizer);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    ParamVector theta = q.minimizer;
    theta += random_theta(p, rng, 3.0);
    const double gap = full_loss(q.spec, q.data, theta) - best;
    const double g2 = squared_l2_norm(full_gradient(q.spec, q.data, theta));
    CHECK(gap >= 0.0);
    CHECK(gap <= g2 / (2.0 * mu) * (1.0 + 1e-9));
  }
}
