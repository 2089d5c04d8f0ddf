// Copyright 2026 The apskit Authors
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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apskit/linalg.hpp"

namespace apskit {

enum class PlanMode { kBound, kAdaptive };

const char* to_string(PlanMode mode);
PlanMode plan_mode_from_string(const std::string& name);

// Resolved numerical parameters of a truncated, discretized series.
struct SeriesPlan {
  double epsilon = 0.0;
  double tau = 0.0;    // t * shift
  double shift = 0.0;  // multiple of the identity subtracted from the generator
  double t = 0.0;
  int M = 0;            // truncation order
  int M_formula = 0;    // order given by the closed-form rule, before any raise
  std::int64_t N_m = 1;  // grid count actually used
  double h = 0.0;        // t / N_m
  double N_m_bound = 0.0;  // grid count required by the a priori bound (may be +inf)
  PlanMode mode = PlanMode::kAdaptive;
  int N_t = 1;           // outer segments
  double tail_bound = 0.0;  // a priori truncation error of order M
  // Constants that appear only inside O(.) and were fixed here.
  std::map<std::string, double> constants;
};

// An approximate propagator next to an independent reference.
struct EvolutionReport {
  std::string method;
  CMatrix approx;
  CMatrix reference;
  double error = 0.0;  // spectral norm of approx - reference
  std::optional<double> bound;
  std::optional<SeriesPlan> plan;
  double wall_seconds = 0.0;
  std::map<std::string, double> diagnostics;

  bool within_bound() const { return !bound || error <= *bound; }
};

// Fills in report.error from approx and reference.
void finalize_error(EvolutionReport& report);

}  // namespace apskit
