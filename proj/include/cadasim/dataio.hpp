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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cadasim/numerics.hpp"
#include "cadasim/problems.hpp"

namespace cadasim {

struct Shard {
  std::size_t worker_id = 0;
  Dataset data;
};

enum class PartitionKind { kUniform, kRandomSizes };

struct PartitionStrategy {
  PartitionKind kind = PartitionKind::kUniform;
  std::uint64_t size_seed = 0;  // random_sizes only
};

// LIBSVM text: `<label> <idx>:<val> ...` with 1-based ascending indices.
// Indices are stored 0-based. Blank lines and `#` comments are skipped.
// dim = max(max index seen, p_hint). Labels are kept as parsed; see
// binarize_labels / index_class_labels. Throws ParseError with the line.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> p_hint = {});
Dataset read_libsvm_file(const std::string& path,
                         std::optional<std::size_t> p_hint = {});

// Writes values in shortest round-trip form, so parse(write(d)) == d.
void write_libsvm(std::ostream& out, const Dataset& data);

// "1"/"+1" -> +1 and "0"/"-1" -> -1; anything else is an error.
Dataset binarize_labels(Dataset data);

// Maps the distinct labels, in ascending order, onto 0..C-1.
Dataset index_class_labels(Dataset data, std::size_t* classes = nullptr);

// Disjoint cover of `data` by M shards. Samples are shuffled with `seed`
// before cutting. Uniform sizes differ by at most one (the first n mod M
// shards get the extra sample); random sizes give every shard >= 1.
std::vector<Shard> partition(const Dataset& data, std::size_t workers,
                             const PartitionStrategy& strategy,
                             std::uint64_t seed);

// Binary logistic data with dense features x = (z + h * s_m) / sqrt(p):
// z ~ N(0, I), s_m ~ N(0, I) a per-worker mean shift scaled by the
// heterogeneity h, labels drawn from the logistic model of a shared
// ground-truth parameter. n splits uniformly over M workers.
std::vector<Shard> gen_synthetic_logreg(std::size_t p, std::size_t n,
                                        std::size_t workers, std::uint64_t seed,
                                        double heterogeneity);

// Same feature model with C-class softmax labels.
std::vector<Shard> gen_synthetic_multiclass(std::size_t p, std::size_t n,
                                            std::size_t workers,
                                            std::size_t classes,
                                            std::uint64_t seed,
                                            double heterogeneity);

struct QuadraticProblem {
  ProblemSpec spec;
  Dataset data;           // rows a_i with labels b_i
  ParamVector minimizer;  // exact minimizer of the full objective
  std::vector<double> hessian_eigenvalues;  // of (1/n) A^T A, ascending
};

// Least squares with Hessian (1/n) A^T A = V diag(eig) V^T, eigenvalues
// geometrically spaced in [1/cond, 1]. Targets b = A theta_true + noise.
QuadraticProblem gen_quadratic(std::size_t p, std::size_t n, std::uint64_t seed,
                               double cond, double noise = 0.1,
                               double lambda = 0.0);

std::vector<const Dataset*> shard_views(const std::vector<Shard>& shards);
Dataset concatenate(const std::vector<Shard>& shards);

}  // namespace cadasim
