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
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cadasim/dataio.hpp"
#include "cadasim/errors.hpp"

using namespace cadasim;

namespace {

const std::string kFixtures = CADASIM_FIXTURES;

Dataset parse_text(const std::string& text, std::optional<std::size_t> hint = {}) {
  std::istringstream in(text);
  return parse_libsvm(in, hint);
}

std::size_t error_line(const std::string& path) {
  try {
    read_libsvm_file(path);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

// Samples keyed by their text form, for multiset comparisons.
std::multiset<std::string> sample_multiset(const Dataset& d) {
  std::multiset<std::string> out;
  for (const Sample& s : d.samples) {
    Dataset one;
    one.samples.push_back(s);
    std::ostringstream os;
    write_libsvm(os, one);
    out.insert(os.str());
  }
  return out;
}

Dataset numbered(std::size_t n) {
  Dataset d;
  d.dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    d.samples.push_back(Sample{{Feature{0, static_cast<double>(i)}}, 1.0});
  }
  return d;
}

}  // namespace

TEST_CASE("parse_libsvm examples") {
  const Dataset one = parse_text("1 1:0.5 3:-2\n");
  REQUIRE(one.size() == 1);
  CHECK(one.dim == 3);
  CHECK(one.samples[0].label == 1.0);
  CHECK(one.samples[0].features == std::vector<Feature>{{0, 0.5}, {2, -2.0}});

  const Dataset two = parse_text("+1 2:1\n\n-1 1:4\n");
  REQUIRE(two.size() == 2);
  CHECK(two.dim == 2);
  CHECK(two.samples[0].label == 1.0);
  CHECK(two.samples[1].label == -1.0);
  CHECK(two.samples[1].features == std::vector<Feature>{{0, 4.0}});

  CHECK(parse_text("1 1:0.5\n", 10).dim == 10);
  CHECK(parse_text("1 4:0.5\n", 2).dim == 4);
  CHECK(parse_text("-1\n").samples[0].features.empty());
}

TEST_CASE("parse_libsvm rejects malformed input with line numbers") {
  CHECK_THROWS_AS(parse_text("abc 1:0.5\n"), ParseError);
  CHECK(error_line(kFixtures + "/bad_label.libsvm") == 1);
  CHECK(error_line(kFixtures + "/bad_token.libsvm") == 3);
  CHECK(error_line(kFixtures + "/non_ascending.libsvm") == 3);
  CHECK(error_line(kFixtures + "/zero_index.libsvm") == 1);
  CHECK(error_line(kFixtures + "/bad_value.libsvm") == 1);
  CHECK_THROWS_AS(parse_text("1 2:1 2:3\n"), ParseError);
  CHECK_THROWS_AS(read_libsvm_file(kFixtures + "/missing.libsvm"), ConfigError);
}

TEST_CASE("fixture parses to the expected samples") {
  const Dataset d = read_libsvm_file(kFixtures + "/small.libsvm");
  REQUIRE(d.size() == 5);
  CHECK(d.dim == 4);
  CHECK(d.samples[2].features == std::vector<Feature>{{0, 1.0}, {1, 2.0}, {2, 3.0}});
  CHECK(d.samples[3].features == std::vector<Feature>{{3, 0.001}});
  CHECK(d.samples[4].features == std::vector<Feature>{{1, -7e-3}, {3, 10.0}});

  const Dataset b = binarize_labels(d);
  std::vector<double> labels;
  for (const Sample& s : b.samples) labels.push_back(s.label);
  CHECK(labels == std::vector<double>{1, -1, 1, -1, 1});
}

TEST_CASE("label mapping") {
  Dataset d = parse_text("2 1:1\n");
  CHECK_THROWS_AS(binarize_labels(d), ContractError);

  std::size_t classes = 0;
  const Dataset mc =
      index_class_labels(read_libsvm_file(kFixtures + "/multiclass.libsvm"), &classes);
  CHECK(classes == 3);
  std::vector<double> labels;
  for (const Sample& s : mc.samples) labels.push_back(s.label);
  CHECK(labels == std::vector<double>{2, 0, 1, 2, 0});
}

TEST_CASE("write then parse reproduces samples") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    Dataset d;
    d.dim = 1 + uniform_index(rng, 20);
    const std::size_t n = 1 + uniform_index(rng, 15);
    for (std::size_t i = 0; i < n; ++i) {
      Sample s;
      s.label = uniform_unit(rng) < 0.5 ? -1.0 : standard_normal(rng);
      for (std::uint32_t j = 0; j < d.dim; ++j) {
        if (uniform_unit(rng) < 0.4) s.features.push_back({j, standard_normal(rng) * 1e3});
      }
      d.samples.push_back(std::move(s));
    }
    std::ostringstream os;
    write_libsvm(os, d);
    const Dataset back = parse_text(os.str(), d.dim);
    CHECK(back == d);
  }
}

TEST_CASE("uniform partition sizes") {
  auto sizes = [](const std::vector<Shard>& shards) {
    std::vector<std::size_t> out;
    for (const Shard& s : shards) out.push_back(s.data.size());
    return out;
  };
  const auto even = partition(numbered(100), 10, {}, 1);
  CHECK(sizes(even) == std::vector<std::size_t>(10, 10));

  const auto odd = sizes(partition(numbered(101), 10, {}, 1));
  CHECK(std::count(odd.begin(), odd.end(), 11) == 1);
  CHECK(std::count(odd.begin(), odd.end(), 10) == 9);

  CHECK_THROWS_AS(partition(numbered(3), 4, {}, 1), ContractError);
  CHECK_THROWS_AS(partition(numbered(3), 0, {}, 1), ContractError);
}

TEST_CASE("random-size partition") {
  const auto shards = partition(numbered(100), 20, {PartitionKind::kRandomSizes, 7}, 7);
  std::size_t total = 0;
  std::set<std::size_t> distinct;
  for (const Shard& s : shards) {
    CHECK(s.data.size() >= 1);
    total += s.data.size();
    distinct.insert(s.data.size());
  }
  CHECK(total == 100);
  CHECK(distinct.size() > 1);

  const auto tight = partition(numbered(20), 20, {PartitionKind::kRandomSizes, 3}, 3);
  for (const Shard& s : tight) CHECK(s.data.size() == 1);
}

TEST_CASE("partition is a deterministic disjoint exact cover") {
  const Dataset src = parse_text(
      "1 1:1\n-1 1:2\n1 2:3\n1 1:1\n-1 3:4\n1 1:5 3:6\n-1 2:7\n1 1:8\n");
  for (const PartitionStrategy strategy :
       {PartitionStrategy{}, PartitionStrategy{PartitionKind::kRandomSizes, 9}}) {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      const auto shards = partition(src, 3, strategy, seed);
      CHECK(sample_multiset(concatenate(shards)) == sample_multiset(src));
      const auto again = partition(src, 3, strategy, seed);
      for (std::size_t m = 0; m < 3; ++m) {
        CHECK(shards[m].worker_id == m);
        CHECK(shards[m].data == again[m].data);
      }
    }
  }
  // Distinct payloads make disjointness visible directly.
  const auto shards = partition(numbered(57), 6, {}, 4);
  std::set<double> seen;
  for (const Shard& s : shards) {
    for (const Sample& x : s.data.samples) CHECK(seen.insert(x.features[0].value).second);
  }
  CHECK(seen.size() == 57);
}

TEST_CASE("synthetic logistic data: determinism and boundaries") {
  const auto a = gen_synthetic_logreg(5, 40, 4, 3, 0.5);
  const auto b = gen_synthetic_logreg(5, 40, 4, 3, 0.5);
  for (std::size_t m = 0; m < 4; ++m) CHECK(a[m].data == b[m].data);
  CHECK(!(gen_synthetic_logreg(5, 40, 4, 4, 0.5)[0].data == a[0].data));

  const auto single = gen_synthetic_logreg(3, 6, 6, 1, 0.0);
  for (const Shard& s : single) CHECK(s.data.size() == 1);

  for (const Shard& s : a) {
    for (const Sample& x : s.data.samples) CHECK((x.label == 1.0 || x.label == -1.0));
  }
  CHECK_THROWS_AS(gen_synthetic_logreg(0, 10, 2, 1, 0.0), ContractError);
  CHECK_THROWS_AS(gen_synthetic_logreg(3, 1, 2, 1, 0.0), ContractError);
  CHECK_THROWS_AS(gen_synthetic_logreg(3, 10, 2, 1, 1.5), ContractError);
}

namespace {

std::vector<double> feature_mean(const Dataset& d) {
  std::vector<double> mean(d.dim, 0.0);
  for (const Sample& s : d.samples) {
    for (const Feature& f : s.features) mean[f.index] += f.value;
  }
  for (double& x : mean) x /= static_cast<double>(d.size());
  return mean;
}

// Mean over coordinates and seeds of (mean_0 - mean_1)^2, divided by its
// i.i.d. expectation 2 * var / (n/M) with per-coordinate var = 1/p.
double normalized_mean_gap(double heterogeneity) {
  const std::size_t p = 10, n = 400, workers = 2;
  double acc = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto shards = gen_synthetic_logreg(p, n, workers, seed, heterogeneity);
    const auto m0 = feature_mean(shards[0].data);
    const auto m1 = feature_mean(shards[1].data);
    for (std::size_t j = 0; j < p; ++j) acc += (m0[j] - m1[j]) * (m0[j] - m1[j]);
  }
  const double expected = 2.0 * (1.0 / p) / (n / workers);
  return acc / (10.0 * p) / expected;
}

}  // namespace

TEST_CASE("homogeneous shards have statistically equal feature means") {
  // 100 chi-square(1) terms: the ratio has sd ~ 0.14, so 3 sigma ~ 0.43.
  const double ratio = normalized_mean_gap(0.0);
  CHECK(ratio > 1.0 - 0.43);
  CHECK(ratio < 1.0 + 0.43);
}

TEST_CASE("heterogeneity shifts worker feature means") {
  CHECK(normalized_mean_gap(0.5) > 10.0);
}

TEST_CASE("synthetic multiclass data") {
  const auto shards = gen_synthetic_multiclass(4, 300, 3, 3, 2, 0.2);
  std::map<double, int> counts;
  for (const Shard& s : shards) {
    for (const Sample& x : s.data.samples) ++counts[x.label];
  }
  CHECK(counts.size() == 3);
  CHECK(counts.begin()->first == 0.0);
  CHECK(counts.rbegin()->first == 2.0);
}

namespace {

Eigen::MatrixXd hessian_of(const QuadraticProblem& q) {
  const auto p = static_cast<Eigen::Index>(q.spec.feature_dim);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (const Sample& s : q.data.samples) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    for (const Feature& f : s.features) a(f.index) = f.value;
    h += a * a.transpose();
  }
  return h / static_cast<double>(q.data.size());
}

}  // namespace

TEST_CASE("gen_quadratic conditioning") {
  const QuadraticProblem iso = gen_quadratic(5, 50, 1, 1.0);
  const Eigen::VectorXd e1 =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian_of(iso)).eigenvalues();
  for (Eigen::Index i = 0; i < e1.size(); ++i) {
    CHECK(std::abs(e1(i) - e1(0)) <= 1e-12 * e1(0));
  }

  const QuadraticProblem q = gen_quadratic(10, 500, 2, 50.0);
  const Eigen::VectorXd e =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian_of(q)).eigenvalues();
  const double measured = e(e.size() - 1) / e(0);
  CHECK(std::abs(measured - 50.0) <= 0.05 * 50.0);

  CHECK(l2_norm(full_gradient(q.spec, q.data, q.minimizer)) <= 1e-10);
  CHECK_THROWS_AS(gen_quadratic(10, 5, 1, 2.0), ContractError);
  CHECK_THROWS_AS(gen_quadratic(3, 10, 1, 0.5), ContractError);
}
