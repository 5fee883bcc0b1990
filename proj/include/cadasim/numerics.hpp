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
#include <deque>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cadasim {

// Dense parameter-shaped vector. Every mutating operation rejects
// non-finite results and mixed-length operands.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0);
  ParamVector(std::initializer_list<double> values);
  explicit ParamVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& raw() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator-=(const ParamVector& other);
  ParamVector& operator*=(double scale);

  // this += scale * other
  ParamVector& add_scaled(double scale, const ParamVector& other);

  void fill(double value);

  // Throws NumericError naming `what` if any entry is NaN or Inf.
  void check_finite(const char* what = "vector") const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

ParamVector operator+(ParamVector lhs, const ParamVector& rhs);
ParamVector operator-(ParamVector lhs, const ParamVector& rhs);
ParamVector operator*(double scale, ParamVector v);

// Throws ContractError when sizes differ.
void require_same_size(const ParamVector& a, const ParamVector& b,
                       const char* what);

double squared_l2_norm(const ParamVector& v);
double l2_norm(const ParamVector& v);
double dot(const ParamVector& a, const ParamVector& b);
double squared_distance(const ParamVector& a, const ParamVector& b);

// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

// Fixed-capacity window of the most recent squared parameter step norms,
// newest first. Rounds before the first record count as zero.
class StepNormWindow {
 public:
  explicit StepNormWindow(std::size_t capacity);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::deque<double>& entries() const noexcept { return entries_; }

  // Sum of stored entries, recomputed from the entries themselves so it
  // never drifts from them.
  double sum() const noexcept;

  void record(double sq_norm);

 private:
  std::size_t capacity_;
  std::deque<double> entries_;
};

StepNormWindow record_step(StepNormWindow window, double sq_norm);
inline double window_sum(const StepNormWindow& window) { return window.sum(); }

}  // namespace cadasim
