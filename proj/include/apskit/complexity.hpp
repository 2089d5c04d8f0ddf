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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apskit/generator.hpp"
#include "apskit/report.hpp"

namespace apskit {

// Constants hidden inside the asymptotic query formulas, fixed here so every
// estimate is a concrete number. Labels travel with each estimate.
struct ComplexityConstants {
  double phase_time = 7.38905609893065;  // e^2, the tau-branch order factor
  double phase_eps = 2.0;                // log-branch order factor
  double amplitude_sqrt = 2.0;           // Gaussian cutoff 2 sqrt(log(1/eps))
  double amplitude_eps = 2.0;            // segment order 2 log / (1 + loglog)
  double lchs_baseline = 1.0;
};

struct QueryEstimate {
  std::string method;
  int M = 0;
  double N_m = 0.0;  // bound-mode grid count (per segment for the amplitude path)
  int N_t = 1;
  double g = 1.0;    // repetition factor ||u0|| / ||u(t)||
  double per_run = 0.0;
  double queries_total = 0.0;  // g * per_run
  std::map<std::string, double> constants_used;
};

// log(1/eps) / max(1, loglog(1/eps)).
double log_over_loglog(double epsilon);

// Phase-driven path: g (c1 A_max t + c2 log(1/eps)/loglog(1/eps)). M and N_m come
// from the bound-mode series plan with shift A_max and commutator rate 2 A_max^2;
// passing ||A1|| reproduces the order the constant-generator evaluator uses.
QueryEstimate estimate_phase_aps(double a_max, double t, double epsilon, double norm_ratio,
                                 const ComplexityConstants& c = {});

// Amplitude-driven path with fast-forwarding:
// g (c3 sqrt(A1_max t log(1/eps)) + c4 A2_max t log(1/eps)/loglog(1/eps)).
QueryEstimate estimate_amplitude_aps(double a1_max, double a2_max, double t, double epsilon,
                                     double norm_ratio, const ComplexityConstants& c = {});

// Multiplicative-epsilon baseline: g c5 A_max t / eps.
QueryEstimate estimate_lchs_baseline(double a_max, double t, double epsilon, double norm_ratio,
                                     const ComplexityConstants& c = {});

struct Scenario {
  std::string name;
  double a_max = 0.0;
  double a1_max = 0.0;
  double a2_max = 0.0;
  double t = 0.0;
  double epsilon = 1e-6;
  double norm_ratio = 1.0;
  PlanMode mode = PlanMode::kAdaptive;
  // When present the evaluators run and report measured error and time.
  std::optional<Generator> generator;
};

struct TableRow {
  std::string scenario;
  QueryEstimate estimate;
  long dim = 0;
  double t = 0.0;
  double epsilon = 0.0;
  std::optional<double> error;
  std::optional<double> bound;
  std::optional<double> wall_ms;
  std::string note;  // why no measurement was taken, if so
};

struct ComparisonTable {
  std::vector<TableRow> rows;
  // Per scenario: the eps at which the amplitude and phase estimates swap
  // order, NaN when the order does not change on [1e-16, 0.5].
  std::map<std::string, double> crossover_epsilon;
};

// Validates each scenario (t >= 0, 0 < eps < 1, nonnegative norms, ratio > 0)
// and throws InvalidArgument otherwise.
void validate_scenario(const Scenario& s);

double crossover_epsilon(const Scenario& s, const ComplexityConstants& c = {});

// Rows phase-APS, amplitude-APS and LCHS baseline per scenario, in input
// order. Scenarios run on up to `threads` workers; the rows do not depend on it.
// Evaluator failures are recorded in the row note instead of thrown.
ComparisonTable compare_table(const std::vector<Scenario>& scenarios,
                              const ComplexityConstants& c = {}, unsigned threads = 1);

// Stable CSV: scenario,method,dim,t,eps,M,N_m,g,queries,error,bound,wall_ms,note.
// Missing measurements are empty fields.
std::string table_csv(const ComparisonTable& table);

}  // namespace apskit
