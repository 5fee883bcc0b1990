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
#include <span>
#include <string>
#include <vector>

#include "cadasim/numerics.hpp"
#include "cadasim/random.hpp"

namespace cadasim {

struct Feature {
  std::uint32_t index;  // 0-based
  double value;
  friend bool operator==(const Feature&, const Feature&) = default;
};

// One training example. For binary tasks the label is -1 or +1, for
// multiclass tasks an integral class id 0..C-1, for least squares the
// real-valued target.
struct Sample {
  std::vector<Feature> features;  // ascending indices
  double label = 0.0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t dim = 0;  // feature dimension

  std::size_t size() const noexcept { return samples.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class ProblemKind { kBinaryLogistic, kMulticlassLogistic, kQuadratic };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

inline constexpr double kDefaultLambda = 1e-5;

// Per-sample losses plus an l2 term (lambda/2)|theta|^2:
//   binary:     ln(1 + exp(-y <x, theta>)),       y in {-1, +1}
//   multiclass: softmax cross-entropy, theta = C class-major blocks of dim
//   quadratic:  (1/2)(<a, theta> - b)^2
// Batch losses are the mean over the batch.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::kBinaryLogistic;
  std::size_t classes = 2;  // used by multiclass only
  double lambda = kDefaultLambda;
  std::size_t feature_dim = 0;

  std::size_t param_dim() const noexcept {
    return kind == ProblemKind::kMulticlassLogistic ? classes * feature_dim
                                                    : feature_dim;
  }

  // Throws ContractError on lambda < 0, classes < 2 for multiclass, ...
  void validate() const;
  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct Minibatch {
  std::vector<std::size_t> indices;
};

// Checks labels and feature indices of `data` against `spec`.
void validate_dataset(const ProblemSpec& spec, const Dataset& data);

double loss(const ProblemSpec& spec, const Dataset& data,
            const ParamVector& theta, const Minibatch& batch);
double full_loss(const ProblemSpec& spec, const Dataset& data,
                 const ParamVector& theta);

ParamVector gradient(const ProblemSpec& spec, const Dataset& data,
                     const ParamVector& theta, const Minibatch& batch);
ParamVector full_gradient(const ProblemSpec& spec, const Dataset& data,
                          const ParamVector& theta);

// Mean over several datasets weighted by sample count; the full training
// objective when shards are passed.
double pooled_loss(const ProblemSpec& spec, std::span<const Dataset* const> parts,
                   const ParamVector& theta);
ParamVector pooled_gradient(const ProblemSpec& spec,
                            std::span<const Dataset* const> parts,
                            const ParamVector& theta);

// batch_size distinct indices from [0, shard_size), uniform without
// replacement. Consumes rng deterministically.
Minibatch sample_minibatch(std::size_t shard_size, std::size_t batch_size,
                           Rng& rng);

}  // namespace cadasim
