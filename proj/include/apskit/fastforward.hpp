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
#include <vector>

#include "apskit/dyson.hpp"
#include "apskit/generator.hpp"
#include "apskit/linalg.hpp"
#include "apskit/report.hpp"

namespace apskit {

// Composite trapezoid data for (1/(2 sqrt(pi))) int_{-M}^{M} e^{-eta^2/4} f(eta) d eta.
// Weights are the plain trapezoid weights; the Gaussian is applied in apply().
struct GaussianQuad {
  double M_cut = 0.0;
  int n_nodes = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  // M_cut = 2 sqrt(log(1/eps)), so the discarded Gaussian mass erfc(M_cut / 2)
  // is below eps. Spacing <= min(1/2, pi / (4 max_frequency)).
  static GaussianQuad build(double epsilon, double max_frequency);

  // (1/(2 sqrt(pi))) sum_i w_i e^{-eta_i^2/4} e^{-i eta_i x}, approximating e^{-x^2}.
  Complex apply(double x) const;
  // apply(0): the represented mass, in [1 - eps, 1].
  double normalization() const;
};

// Cutoff with e^{-M^2/4} = eps.
double gaussian_cutoff(double epsilon);

// e^{-L t} for PSD L by quadrature of the Gaussian Fourier representation,
// evaluated on the eigenvalues of L. `quad_out` receives the rule used.
CMatrix gaussian_ff_apply(const HermitianEigen& l, double t, double epsilon,
                          GaussianQuad* quad_out = nullptr);

// Report form of gaussian_ff_apply against expm(-L t). Eigenvalues below
// -1e-8 raise NotPsdError; non-Hermitian input raises InvalidArgument.
EvolutionReport gaussian_ff(const CMatrix& l, double t, double epsilon);

struct StochasticOptions {
  // Target of the per-draw truncation |xi| < M; draws beyond M are set to 0.
  double epsilon = 1e-8;
  // Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 1;
};

struct StochasticEstimate {
  CMatrix mean;
  // Frobenius norm of the entrywise standard-error matrix; +inf for one sample.
  double stderr_norm = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double truncation = 0.0;  // M
  int segments = 0;
};

// Truncation M with 4 N_t sqrt(t L_max) / ds * e^{-ds M^2 / 4} <= eps, where ds is
// the shortest segment as a fraction of t. At least 1.
double stochastic_truncation(int segments, double min_fraction, double t_l_max, double epsilon);

// Monte Carlo estimate of T exp(-int_0^t L) for piecewise-constant PSD L:
// the mean of prod_j exp(-i xi_j ds_j sqrt(t L_j)) with independent
// xi_j ~ N(0, 2/ds_j) and ds_j the segment lengths as fractions of t.
// Sample n, segment j draws from Philox stream n under key `seed`.
StochasticEstimate piecewise_stochastic_ff(const Generator& gen, double t, std::uint64_t samples,
                                           std::uint64_t seed, const StochasticOptions& options = {});

// Segment count ceil(A2_max t / (log(2) / 2)), at least 1.
int amplitude_segments(double a2_max, double t);

// max{ceil(2 tau2), ceil(2 log(1/eps) / (1 + loglog(1/eps)))}; 0 when tau2 = 0.
int amplitude_truncation_order(double tau2, double epsilon);

// M e^{tau2} (A1_max A2_max t + A2_max (tau2 + 1)) / eps.
double amplitude_grid_bound(int M, double a1_max, double a2_max, double t, double epsilon);

struct AmplitudeOptions {
  // Build the e^{-A1 h} step factors by Gaussian quadrature instead of expm.
  bool fast_forward_steps = false;
  RefinementOptions refinement;
};

// exp(-A t) as [sum_k (-i)^k Y_k]^{N_t}, where Y_k are ordered sums of A2
// interleaved with e^{-A1 h} over one segment of length t / N_t. Requires A1 PSD.
// Plan fields describe one segment (t, tau = A2_max t / N_t, eps / N_t).
EvolutionReport approximate_expAt_amplitude(const CMatrix& a, double t, double epsilon,
                                            PlanMode mode = PlanMode::kAdaptive,
                                            const AmplitudeOptions& options = {});

}  // namespace apskit
