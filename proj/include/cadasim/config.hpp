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

#include <iosfwd>
#include <string>
#include <string_view>

#include "cadasim/diagnostics.hpp"
#include "cadasim/engine.hpp"

namespace cadasim {

// Parses a JSON experiment document. Unknown keys are rejected; omitted
// optional fields take the ExperimentConfig defaults. Required: problem.kind,
// workers, algorithm, schedule.kind (plus that schedule's parameters) and
// rounds. Throws ConfigError with a message naming the offending field.
ExperimentConfig load_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

// Inverse of load_config: load_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

inline constexpr std::string_view kMetricsHeader =
    "round,loss,grad_norm_sq,uploads,cum_uploads,cum_grad_evals,alpha";

// One row per record; reals in shortest round-trip form, unevaluated
// loss/grad_norm_sq cells left empty.
void write_metrics_csv(const MetricsLog& log, std::ostream& out);

}  // namespace cadasim
