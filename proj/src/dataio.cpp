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
#include "cadasim/dataio.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string_view>

#include "cadasim/errors.hpp"
#include "cadasim/random.hpp"

namespace cadasim {
namespace {

constexpr std::uint64_t kShuffleSalt = 0x5348554646ULL;
constexpr std::uint64_t kSizeSalt = 0x53495a4553ULL;
constexpr std::uint64_t kDataSalt = 0x44415441ULL;

bool parse_real(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_index(std::string_view text, std::uint64_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, 0, kShuffleSalt);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  return order;
}

std::vector<std::size_t> uniform_sizes(std::size_t n, std::size_t workers) {
  std::vector<std::size_t> sizes(workers, n / workers);
  for (std::size_t m = 0; m < n % workers; ++m) ++sizes[m];
  return sizes;
}

// Every worker gets one sample, the remaining n - M are dealt out with
// probabilities proportional to uniform random weights.
std::vector<std::size_t> random_sizes(std::size_t n, std::size_t workers,
                                      std::uint64_t seed) {
  Rng rng = derive_rng(seed, 0, kSizeSalt);
  std::vector<double> cumulative(workers);
  double total = 0.0;
  for (std::size_t m = 0; m < workers; ++m) {
    total += 0.05 + uniform_unit(rng);
    cumulative[m] = total;
  }
  std::vector<std::size_t> sizes(workers, 1);
  for (std::size_t i = workers; i < n; ++i) {
    const double u = uniform_unit(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto m = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), workers - 1);
    ++sizes[m];
  }
  return sizes;
}

void check_sizes(std::size_t p, std::size_t n, std::size_t workers) {
  if (p < 1 || n < 1 || workers < 1) {
    throw ContractError("generator sizes must be >= 1");
  }
  if (n < workers) throw ContractError("need at least one sample per worker");
}

struct FeatureModel {
  std::size_t p;
  double heterogeneity;
  std::vector<ParamVector> shifts;  // one per worker

  std::vector<Feature> draw(std::size_t worker, Rng& rng) const {
    std::vector<Feature> x(p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (std::size_t j = 0; j < p; ++j) {
      const double z = standard_normal(rng) + heterogeneity * shifts[worker][j];
      x[j] = Feature{static_cast<std::uint32_t>(j), z * scale};
    }
    return x;
  }
};

FeatureModel make_feature_model(std::size_t p, std::size_t workers,
                                double heterogeneity, Rng& rng) {
  if (!(heterogeneity >= 0.0 && heterogeneity <= 1.0)) {
    throw ContractError("heterogeneity must lie in [0, 1]");
  }
  FeatureModel model{p, heterogeneity, {}};
  for (std::size_t m = 0; m < workers; ++m) {
    ParamVector shift(p);
    for (std::size_t j = 0; j < p; ++j) shift[j] = standard_normal(rng);
    model.shifts.push_back(std::move(shift));
  }
  return model;
}

double sparse_dot(const std::vector<Feature>& x, const ParamVector& theta,
                  std::size_t offset) {
  double acc = 0.0;
  for (const Feature& f : x) acc += f.value * theta[offset + f.index];
  return acc;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> p_hint) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    Sample sample;
    if (!parse_real(tokens[0], sample.label)) {
      throw ParseError(line_no, "unreadable label '" + std::string(tokens[0]) + "'");
    }
    std::uint64_t previous = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed token '" + std::string(tok) + "'");
      }
      std::uint64_t index = 0;
      double value = 0.0;
      if (!parse_index(tok.substr(0, colon), index) || index == 0 ||
          index > UINT32_MAX) {
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!parse_real(tok.substr(colon + 1), value)) {
        throw ParseError(line_no, "bad feature value in '" + std::string(tok) + "'");
      }
      if (index <= previous) {
        throw ParseError(line_no, "feature indices not ascending at '" +
                                      std::string(tok) + "'");
      }
      previous = index;
      sample.features.push_back(
          Feature{static_cast<std::uint32_t>(index - 1), value});
      max_index = std::max<std::size_t>(max_index, index);
    }
    data.samples.push_back(std::move(sample));
  }
  if (in.bad()) throw ParseError(line_no, "read failure");
  data.dim = std::max(max_index, p_hint.value_or(0));
  return data;
}

Dataset read_libsvm_file(const std::string& path,
                         std::optional<std::size_t> p_hint) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return parse_libsvm(in, p_hint);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (const Sample& s : data.samples) {
    out << format_shortest(s.label);
    for (const Feature& f : s.features) {
      out << ' ' << (f.index + 1) << ':' << format_shortest(f.value);
    }
    out << '\n';
  }
}

Dataset binarize_labels(Dataset data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    double& y = data.samples[i].label;
    if (y == 1.0) {
      y = 1.0;
    } else if (y == 0.0 || y == -1.0) {
      y = -1.0;
    } else {
      throw ContractError("sample " + std::to_string(i) + ": label " +
                          format_shortest(y) + " is not a binary label");
    }
  }
  return data;
}

Dataset index_class_labels(Dataset data, std::size_t* classes) {
  std::map<double, std::size_t> ids;
  for (const Sample& s : data.samples) ids.emplace(s.label, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  for (Sample& s : data.samples) s.label = static_cast<double>(ids.at(s.label));
  if (classes != nullptr) *classes = ids.size();
  return data;
}

std::vector<Shard> partition(const Dataset& data, std::size_t workers,
                             const PartitionStrategy& strategy,
                             std::uint64_t seed) {
  if (workers < 1) throw ContractError("partition: need at least one worker");
  if (data.size() < workers) {
    throw ContractError("partition: " + std::to_string(data.size()) +
                        " samples cannot cover " + std::to_string(workers) +
                        " workers");
  }
  const std::vector<std::size_t> sizes =
      strategy.kind == PartitionKind::kUniform
          ? uniform_sizes(data.size(), workers)
          : random_sizes(data.size(), workers, strategy.size_seed);
  const std::vector<std::size_t> order = shuffled_order(data.size(), seed);

  std::vector<Shard> shards(workers);
  std::size_t cursor = 0;
  for (std::size_t m = 0; m < workers; ++m) {
    shards[m].worker_id = m;
    shards[m].data.dim = data.dim;
    shards[m].data.samples.reserve(sizes[m]);
    for (std::size_t j = 0; j < sizes[m]; ++j) {
      shards[m].data.samples.push_back(data.samples[order[cursor++]]);
    }
  }
  return shards;
}

std::vector<Shard> gen_synthetic_logreg(std::size_t p, std::size_t n,
                                        std::size_t workers, std::uint64_t seed,
                                        double heterogeneity) {
  check_sizes(p, n, workers);
  Rng rng = derive_rng(seed, 0, kDataSalt);
  ParamVector truth(p);
  for (std::size_t j = 0; j < p; ++j) truth[j] = 3.0 * standard_normal(rng);
  const FeatureModel model = make_feature_model(p, workers, heterogeneity, rng);

  const std::vector<std::size_t> sizes = uniform_sizes(n, workers);
  std::vector<Shard> shards(workers);
  for (std::size_t m = 0; m < workers; ++m) {
    shards[m].worker_id = m;
    shards[m].data.dim = p;
    Rng local = derive_rng(seed, m, kDataSalt);
    for (std::size_t i = 0; i < sizes[m]; ++i) {
      Sample s;
      s.features = model.draw(m, local);
      const double margin = sparse_dot(s.features, truth, 0);
      const double prob = 1.0 / (1.0 + std::exp(-margin));
      s.label = uniform_unit(local) < prob ? 1.0 : -1.0;
      shards[m].data.samples.push_back(std::move(s));
    }
  }
  return shards;
}

std::vector<Shard> gen_synthetic_multiclass(std::size_t p, std::size_t n,
                                            std::size_t workers,
                                            std::size_t classes,
                                            std::uint64_t seed,
                                            double heterogeneity) {
  check_sizes(p, n, workers);
  if (classes < 2) throw ContractError("need at least two classes");
  Rng rng = derive_rng(seed, 0, kDataSalt ^ classes);
  ParamVector truth(p * classes);
  for (std::size_t j = 0; j < truth.size(); ++j) truth[j] = 3.0 * standard_normal(rng);
  const FeatureModel model = make_feature_model(p, workers, heterogeneity, rng);

  const std::vector<std::size_t> sizes = uniform_sizes(n, workers);
  std::vector<Shard> shards(workers);
  std::vector<double> weights(classes);
  for (std::size_t m = 0; m < workers; ++m) {
    shards[m].worker_id = m;
    shards[m].data.dim = p;
    Rng local = derive_rng(seed, m, kDataSalt ^ classes);
    for (std::size_t i = 0; i < sizes[m]; ++i) {
      Sample s;
      s.features = model.draw(m, local);
      double top = -INFINITY;
      for (std::size_t c = 0; c < classes; ++c) {
        weights[c] = sparse_dot(s.features, truth, c * p);
        top = std::max(top, weights[c]);
      }
      double total = 0.0;
      for (double& w : weights) {
        w = std::exp(w - top);
        total += w;
      }
      double u = uniform_unit(local) * total;
      std::size_t label = classes - 1;
      for (std::size_t c = 0; c < classes; ++c) {
        if (u < weights[c]) {
          label = c;
          break;
        }
        u -= weights[c];
      }
      s.label = static_cast<double>(label);
      shards[m].data.samples.push_back(std::move(s));
    }
  }
  return shards;
}

QuadraticProblem gen_quadratic(std::size_t p, std::size_t n, std::uint64_t seed,
                               double cond, double noise, double lambda) {
  if (p < 1 || n < p) throw ContractError("gen_quadratic: need n >= p >= 1");
  if (!(cond >= 1.0) || !std::isfinite(cond)) {
    throw ContractError("gen_quadratic: condition number must be >= 1");
  }
  if (!(noise >= 0.0) || !(lambda >= 0.0)) {
    throw ContractError("gen_quadratic: noise and lambda must be >= 0");
  }
  Rng rng = derive_rng(seed, 0, kDataSalt ^ 0x51554144ULL);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = standard_normal(rng);
    }
    return g;
  };
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd u =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rows, cols)).householderQ() *
      Eigen::MatrixXd::Identity(rows, cols);
  const Eigen::MatrixXd v =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(cols, cols)).householderQ() *
      Eigen::MatrixXd::Identity(cols, cols);

  std::vector<double> eig(p);
  Eigen::VectorXd singular(cols);
  for (std::size_t j = 0; j < p; ++j) {
    const double t = p == 1 ? 1.0 : static_cast<double>(j) / static_cast<double>(p - 1);
    eig[j] = std::pow(cond, t - 1.0);  // 1/cond .. 1
    singular(static_cast<Eigen::Index>(j)) = std::sqrt(static_cast<double>(n) * eig[j]);
  }
  const Eigen::MatrixXd a = u * singular.asDiagonal() * v.transpose();

  Eigen::VectorXd truth(cols);
  for (Eigen::Index j = 0; j < cols; ++j) truth(j) = standard_normal(rng);
  Eigen::VectorXd b = a * truth;
  for (Eigen::Index i = 0; i < rows; ++i) b(i) += noise * standard_normal(rng);

  QuadraticProblem out;
  out.spec.kind = ProblemKind::kQuadratic;
  out.spec.lambda = lambda;
  out.spec.feature_dim = p;
  out.data.dim = p;
  out.data.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample& s = out.data.samples[i];
    s.label = b(static_cast<Eigen::Index>(i));
    s.features.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      s.features[j] = Feature{static_cast<std::uint32_t>(j),
                              a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))};
    }
  }

  // Normal equations of the objective as it is evaluated from the rows.
  Eigen::MatrixXd hessian = a.transpose() * a / static_cast<double>(n);
  hessian.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = a.transpose() * b / static_cast<double>(n);
  const Eigen::VectorXd solution = hessian.ldlt().solve(rhs);
  std::vector<double> minimizer(solution.data(), solution.data() + solution.size());
  out.minimizer = ParamVector(std::move(minimizer));
  out.hessian_eigenvalues = eig;
  return out;
}

std::vector<const Dataset*> shard_views(const std::vector<Shard>& shards) {
  std::vector<const Dataset*> views;
  views.reserve(shards.size());
  for (const Shard& s : shards) views.push_back(&s.data);
  return views;
}

Dataset concatenate(const std::vector<Shard>& shards) {
  Dataset all;
  for (const Shard& s : shards) {
    all.dim = std::max(all.dim, s.data.dim);
    all.samples.insert(all.samples.end(), s.data.samples.begin(), s.data.samples.end());
  }
  return all;
}

}  // namespace cadasim
