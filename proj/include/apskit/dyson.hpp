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
#include <functional>
#include <vector>

#include "apskit/generator.hpp"
#include "apskit/linalg.hpp"
#include "apskit/report.hpp"

namespace apskit {

// e^{-tau} sum_{k > M} tau^k / k!, the Poisson tail that bounds truncation.
double poisson_tail(double tau, int M);
// e^{-(tau + M)}, valid once M > e^2 tau.
double chernoff_tail(double tau, int M);

// Closed-form truncation order for a shifted series with parameter tau:
//   tau >= log(1/eps)/(e+1):  smallest M > max{e^2 tau, log(1/eps)}
//   otherwise:                M = max{ceil(2 tau), ceil(2 log(1/eps) / loglog(1/eps))}
// loglog is clamped below at 1. tau = 0 gives 0.
int truncation_order(double tau, double epsilon);

// Smallest M with poisson_tail(tau, M) <= target.
int order_for_tail(double tau, double target);

// M (Lhat t + L (tau + 1)) / eps.
double grid_count_bound(int M, double L_max, double Lhat_max, double t, double epsilon);

// Bound mode uses the closed forms as they stand; a non-differentiable family
// (Lhat = inf) falls back to adaptive. Adaptive mode raises M until the
// Poisson tail is at most eps / 4 and starts the grid at 64 points.
SeriesPlan plan_series(double L_max, double Lhat_max, double t, double epsilon, PlanMode mode);

struct RefinementOptions {
  std::int64_t initial_grid = 64;
  std::int64_t max_grid = std::int64_t{1} << 22;
  // Richardson extrapolation across grid levels; off means plain doubling.
  bool extrapolate = true;
};

struct SeriesEvaluation {
  CMatrix value;
  std::int64_t N_m = 0;        // finest grid evaluated
  int levels = 1;              // grids evaluated
  double last_change = 0.0;    // norm change at the final refinement (adaptive)
  double coefficient_weight = 0.0;
};

// Grid data of one ordered sum: the shifted generator at point m, and
// optionally the propagator across [m h, (m+1) h] applied after it.
struct OrderedSumTerms {
  std::function<CMatrix(std::int64_t m, double h)> operand;
  std::function<CMatrix(std::int64_t m, double h)> step;  // empty means identity
};

// S_k = h^k sum over 0 <= m_1 < ... < m_k < N of the time-ordered products,
// k = 0..M, computed by the recurrence W_k <- V_m (W_k + h X_m W_{k-1}).
std::vector<CMatrix> ordered_sums(Eigen::Index dim, int M, std::int64_t N, double t,
                                  const OrderedSumTerms& terms);

// Same quantity by explicit enumeration of index tuples (tests and small N).
std::vector<CMatrix> ordered_sums_enumerated(Eigen::Index dim, int M, std::int64_t N, double t,
                                             const OrderedSumTerms& terms);

// Combines S_0..S_M into sum_k coefficient(k) S_k.
using SeriesCombiner = std::function<CMatrix(const std::vector<CMatrix>&)>;

// Evaluates the series at plan.N_m (bound mode) or refines the grid until
// the (extrapolated) value changes by less than `target` (adaptive mode).
// coefficient_weight is prefactor * sum_k h^k C(N_m, k) operand_norm^k.
SeriesEvaluation evaluate_on_grid(Eigen::Index dim, const SeriesPlan& plan,
                                  const OrderedSumTerms& terms, const SeriesCombiner& combine,
                                  double target, double operand_norm, double prefactor,
                                  const RefinementOptions& options = {});

// e^{-tau} sum_k (-1)^k Q_k with Q_k the ordered sums of L(m h) - L_max I.
// Samples must be Hermitian to 1e-8 (NotHermitianError otherwise).
SeriesEvaluation eval_shifted_series(const Sampler& L, double L_max, const SeriesPlan& plan,
                                     const RefinementOptions& options = {});

// exp(-A t) through the phase factorization and the shifted series on
// s -> e^{i A2 s} A1 e^{-i A2 s}. Requires A1 PSD (to -1e-8).
EvolutionReport approximate_expAt_phase(const CMatrix& a, double t, double epsilon,
                                        PlanMode mode = PlanMode::kAdaptive,
                                        const RefinementOptions& options = {});

// T exp(-int A) for a time-dependent generator: ordered sums of the shifted
// A1 interleaved with phase propagators between grid points.
EvolutionReport approximate_time_dependent(const Generator& gen, double t, double epsilon,
                                           PlanMode mode = PlanMode::kAdaptive,
                                           const RefinementOptions& options = {});

struct IllPosedOptions {
  double horizon_limit = 4.0;  // max |lambda_min(A1)| t
};

// exp(-A t) when A1 has negative eigenvalues, shifting by (A_max + lambda_min)/2.
// The report bound is eps * e^{|lambda_min| t}.
EvolutionReport ill_posed_variant(const CMatrix& a, double t, double epsilon,
                                  const IllPosedOptions& options = {},
                                  PlanMode mode = PlanMode::kAdaptive);

// Polynomial source term b(t) = sum_k coefficients[k] t^k.
struct SourceTerm {
  std::vector<CVector> coefficients;
  CVector at(double t) const;
};

struct InhomogeneousEmbedding {
  Generator expanded;  // dimension 2n
  CVector initial;     // [u0; K 1]
  double scale = 1.0;  // K
  bool trivial = false;  // b vanished; K forced to 1
};

// du/dt = -A u + b as the homogeneous system of twice the dimension with
// generator [[A, -diag(b)/K], [0, 0]] and initial state [u0; K 1], so the top
// block of the expanded solution is u. K = t * sup_t max_i |b_i(t)|.
InhomogeneousEmbedding inhomogeneous_expand(const Generator& gen, const SourceTerm& b,
                                            const CVector& u0);

}  // namespace apskit
