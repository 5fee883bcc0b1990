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
#include "cadasim/numerics.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include "cadasim/errors.hpp"

namespace cadasim {

ParamVector::ParamVector(std::size_t size, double fill) : values_(size, fill) {
  check_finite("fill value");
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : values_(values) {
  check_finite();
}

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
  check_finite();
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  require_same_size(*this, other, "vector addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  check_finite("vector sum");
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
  require_same_size(*this, other, "vector subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  check_finite("vector difference");
  return *this;
}

ParamVector& ParamVector::operator*=(double scale) {
  for (double& x : values_) x *= scale;
  check_finite("scaled vector");
  return *this;
}

ParamVector& ParamVector::add_scaled(double scale, const ParamVector& other) {
  require_same_size(*this, other, "scaled addition");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += scale * other.values_[i];
  }
  check_finite("scaled addition");
  return *this;
}

void ParamVector::fill(double value) {
  for (double& x : values_) x = value;
  check_finite("fill value");
}

void ParamVector::check_finite(const char* what) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NumericError(std::string(what) + ": non-finite entry at index " +
                         std::to_string(i));
    }
  }
}

ParamVector operator+(ParamVector lhs, const ParamVector& rhs) {
  lhs += rhs;
  return lhs;
}

ParamVector operator-(ParamVector lhs, const ParamVector& rhs) {
  lhs -= rhs;
  return lhs;
}

ParamVector operator*(double scale, ParamVector v) {
  v *= scale;
  return v;
}

void require_same_size(const ParamVector& a, const ParamVector& b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(what) + ": length mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

double squared_l2_norm(const ParamVector& v) {
  double acc = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("squared_l2_norm: non-finite entry");
    acc += x * x;
  }
  if (!std::isfinite(acc)) throw NumericError("squared_l2_norm: overflow");
  return acc;
}

double l2_norm(const ParamVector& v) { return std::sqrt(squared_l2_norm(v)); }

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_size(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(const ParamVector& a, const ParamVector& b) {
  require_same_size(a, b, "squared_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  if (!std::isfinite(acc)) throw NumericError("squared_distance: non-finite");
  return acc;
}

std::string format_shortest(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

StepNormWindow::StepNormWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("StepNormWindow: capacity must be >= 1");
}

double StepNormWindow::sum() const noexcept {
  double acc = 0.0;
  for (double x : entries_) acc += x;
  return acc;
}

void StepNormWindow::record(double sq_norm) {
  if (!(sq_norm >= 0.0) || !std::isfinite(sq_norm)) {
    throw ContractError("StepNormWindow: step norm must be finite and >= 0");
  }
  entries_.push_front(sq_norm);
  if (entries_.size() > capacity_) entries_.pop_back();
}

StepNormWindow record_step(StepNormWindow window, double sq_norm) {
  window.record(sq_norm);
  return window;
}

}  // namespace cadasim
