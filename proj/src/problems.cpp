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
#include "cadasim/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cadasim/errors.hpp"

namespace cadasim {
namespace {

double sparse_dot(const std::vector<Feature>& x, const ParamVector& theta,
                  std::size_t offset) {
  double acc = 0.0;
  for (const Feature& f : x) acc += f.value * theta[offset + f.index];
  return acc;
}

// ln(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// sigma(-z) = 1 / (1 + exp(z))
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_theta(const ProblemSpec& spec, const ParamVector& theta) {
  if (theta.size() != spec.param_dim()) {
    throw ContractError("parameter length " + std::to_string(theta.size()) +
                        " does not match problem dimension " +
                        std::to_string(spec.param_dim()));
  }
}

void check_batch(const Dataset& data, const Minibatch& batch) {
  if (batch.indices.empty()) throw ContractError("empty minibatch");
  for (std::size_t i : batch.indices) {
    if (i >= data.size()) throw ContractError("minibatch index out of range");
  }
}

double sample_loss(const ProblemSpec& spec, const Sample& s,
                   const ParamVector& theta, std::vector<double>& scores) {
  switch (spec.kind) {
    case ProblemKind::kBinaryLogistic:
      return log1p_exp_neg(s.label * sparse_dot(s.features, theta, 0));
    case ProblemKind::kQuadratic: {
      const double r = sparse_dot(s.features, theta, 0) - s.label;
      return 0.5 * r * r;
    }
    case ProblemKind::kMulticlassLogistic: {
      const std::size_t d = spec.feature_dim;
      double top = -INFINITY;
      for (std::size_t c = 0; c < spec.classes; ++c) {
        scores[c] = sparse_dot(s.features, theta, c * d);
        top = std::max(top, scores[c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < spec.classes; ++c) z += std::exp(scores[c] - top);
      return top + std::log(z) - scores[static_cast<std::size_t>(s.label)];
    }
  }
  return 0.0;
}

// Adds the per-sample gradient into grad.
void accumulate_sample_gradient(const ProblemSpec& spec, const Sample& s,
                                const ParamVector& theta,
                                std::vector<double>& scores,
                                std::vector<double>& grad) {
  switch (spec.kind) {
    case ProblemKind::kBinaryLogistic: {
      const double z = s.label * sparse_dot(s.features, theta, 0);
      const double w = -s.label * sigmoid_neg(z);
      for (const Feature& f : s.features) grad[f.index] += w * f.value;
      return;
    }
    case ProblemKind::kQuadratic: {
      const double r = sparse_dot(s.features, theta, 0) - s.label;
      for (const Feature& f : s.features) grad[f.index] += r * f.value;
      return;
    }
    case ProblemKind::kMulticlassLogistic: {
      const std::size_t d = spec.feature_dim;
      double top = -INFINITY;
      for (std::size_t c = 0; c < spec.classes; ++c) {
        scores[c] = sparse_dot(s.features, theta, c * d);
        top = std::max(top, scores[c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < spec.classes; ++c) {
        scores[c] = std::exp(scores[c] - top);
        z += scores[c];
      }
      const auto label = static_cast<std::size_t>(s.label);
      for (std::size_t c = 0; c < spec.classes; ++c) {
        const double w = scores[c] / z - (c == label ? 1.0 : 0.0);
        for (const Feature& f : s.features) grad[c * d + f.index] += w * f.value;
      }
      return;
    }
  }
}

double regularizer(const ProblemSpec& spec, const ParamVector& theta) {
  return spec.lambda == 0.0 ? 0.0 : 0.5 * spec.lambda * squared_l2_norm(theta);
}

Minibatch all_samples(const Dataset& data) {
  Minibatch batch;
  batch.indices.resize(data.size());
  std::iota(batch.indices.begin(), batch.indices.end(), std::size_t{0});
  return batch;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kBinaryLogistic: return "binary_logistic";
    case ProblemKind::kMulticlassLogistic: return "multiclass_logistic";
    case ProblemKind::kQuadratic: return "quadratic";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "binary_logistic") return ProblemKind::kBinaryLogistic;
  if (name == "multiclass_logistic") return ProblemKind::kMulticlassLogistic;
  if (name == "quadratic") return ProblemKind::kQuadratic;
  throw ConfigError("unknown problem kind '" + name + "'");
}

void ProblemSpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractError("lambda must be finite and >= 0");
  }
  if (feature_dim == 0) throw ContractError("feature dimension must be >= 1");
  if (kind == ProblemKind::kMulticlassLogistic && classes < 2) {
    throw ContractError("multiclass problems need at least 2 classes");
  }
}

void validate_dataset(const ProblemSpec& spec, const Dataset& data) {
  if (data.size() == 0) throw ContractError("dataset is empty");
  if (data.dim > spec.feature_dim) {
    throw ContractError("dataset dimension exceeds problem dimension");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample& s = data.samples[i];
    for (const Feature& f : s.features) {
      if (f.index >= spec.feature_dim) {
        throw ContractError("sample " + std::to_string(i) +
                            ": feature index out of range");
      }
    }
    switch (spec.kind) {
      case ProblemKind::kBinaryLogistic:
        if (s.label != 1.0 && s.label != -1.0) {
          throw ContractError("sample " + std::to_string(i) +
                              ": binary label must be -1 or +1");
        }
        break;
      case ProblemKind::kMulticlassLogistic:
        if (s.label < 0.0 || s.label != std::floor(s.label) ||
            s.label >= static_cast<double>(spec.classes)) {
          throw ContractError("sample " + std::to_string(i) +
                              ": class label out of range");
        }
        break;
      case ProblemKind::kQuadratic:
        if (!std::isfinite(s.label)) {
          throw ContractError("sample " + std::to_string(i) +
                              ": non-finite target");
        }
        break;
    }
  }
}

double loss(const ProblemSpec& spec, const Dataset& data,
            const ParamVector& theta, const Minibatch& batch) {
  check_theta(spec, theta);
  check_batch(data, batch);
  std::vector<double> scores(spec.classes);
  double acc = 0.0;
  for (std::size_t i : batch.indices) {
    acc += sample_loss(spec, data.samples[i], theta, scores);
  }
  const double value =
      acc / static_cast<double>(batch.indices.size()) + regularizer(spec, theta);
  if (!std::isfinite(value)) throw NumericError("loss is not finite");
  return value;
}

double full_loss(const ProblemSpec& spec, const Dataset& data,
                 const ParamVector& theta) {
  return loss(spec, data, theta, all_samples(data));
}

ParamVector gradient(const ProblemSpec& spec, const Dataset& data,
                     const ParamVector& theta, const Minibatch& batch) {
  check_theta(spec, theta);
  check_batch(data, batch);
  std::vector<double> scores(spec.classes);
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t i : batch.indices) {
    accumulate_sample_gradient(spec, data.samples[i], theta, scores, grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t j = 0; j < grad.size(); ++j) {
    grad[j] = grad[j] * inv + spec.lambda * theta[j];
  }
  return ParamVector(std::move(grad));  // throws on non-finite
}

ParamVector full_gradient(const ProblemSpec& spec, const Dataset& data,
                          const ParamVector& theta) {
  return gradient(spec, data, theta, all_samples(data));
}

double pooled_loss(const ProblemSpec& spec, std::span<const Dataset* const> parts,
                   const ParamVector& theta) {
  check_theta(spec, theta);
  std::vector<double> scores(spec.classes);
  double acc = 0.0;
  std::size_t n = 0;
  for (const Dataset* part : parts) {
    for (const Sample& s : part->samples) acc += sample_loss(spec, s, theta, scores);
    n += part->size();
  }
  if (n == 0) throw ContractError("pooled_loss: no samples");
  const double value = acc / static_cast<double>(n) + regularizer(spec, theta);
  if (!std::isfinite(value)) throw NumericError("loss is not finite");
  return value;
}

ParamVector pooled_gradient(const ProblemSpec& spec,
                            std::span<const Dataset* const> parts,
                            const ParamVector& theta) {
  check_theta(spec, theta);
  std::vector<double> scores(spec.classes);
  std::vector<double> grad(theta.size(), 0.0);
  std::size_t n = 0;
  for (const Dataset* part : parts) {
    for (const Sample& s : part->samples) {
      accumulate_sample_gradient(spec, s, theta, scores, grad);
    }
    n += part->size();
  }
  if (n == 0) throw ContractError("pooled_gradient: no samples");
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < grad.size(); ++j) {
    grad[j] = grad[j] * inv + spec.lambda * theta[j];
  }
  return ParamVector(std::move(grad));
}

Minibatch sample_minibatch(std::size_t shard_size, std::size_t batch_size,
                           Rng& rng) {
  if (batch_size < 1 || batch_size > shard_size) {
    throw ContractError("batch size " + std::to_string(batch_size) +
                        " outside [1, " + std::to_string(shard_size) + "]");
  }
  Minibatch batch;
  batch.indices.reserve(batch_size);
  if (batch_size <= 32 && batch_size * 8 <= shard_size) {
    // Sparse draw: rejection of duplicates.
    while (batch.indices.size() < batch_size) {
      const std::size_t i = uniform_index(rng, shard_size);
      if (std::find(batch.indices.begin(), batch.indices.end(), i) ==
          batch.indices.end()) {
        batch.indices.push_back(i);
      }
    }
    return batch;
  }
  // Dense draw: partial Fisher-Yates.
  std::vector<std::size_t> pool(shard_size);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t j = 0; j < batch_size; ++j) {
    const std::size_t pick = j + uniform_index(rng, shard_size - j);
    std::swap(pool[j], pool[pick]);
    batch.indices.push_back(pool[j]);
  }
  return batch;
}

}  // namespace cadasim
