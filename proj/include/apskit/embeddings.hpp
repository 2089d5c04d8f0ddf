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
#include <string>
#include <vector>

#include "apskit/generator.hpp"
#include "apskit/linalg.hpp"
#include "apskit/report.hpp"

namespace apskit {

// Real kernel gamma with e^{-x} = int gamma(eta) e^{-i eta x} d eta for x >= 0.
struct LchsKernel {
  std::string name;
  std::function<double(double)> gamma;
  // int_{|eta| > M} |gamma(eta)| d eta, nonincreasing in M.
  std::function<double(double)> tail_mass;

  // gamma = 1 / (pi (1 + eta^2)), tail (2/pi) arctan(1/M).
  static LchsKernel cauchy();
};

// Smallest symmetric cutoff M with tail_mass(M) <= target, by bisection.
double kernel_cutoff(const LchsKernel& kernel, double target);

// Truncated trapezoid rule for int_{-M}^{M} gamma(eta) f(eta) d eta. The step
// starts at min(1/2, pi / (4 frequency)) and halves until two levels differ by
// less than `target`.
struct KernelQuadrature {
  CMatrix value;
  double M_cut = 0.0;
  double step = 0.0;
  std::int64_t nodes = 0;
  double last_change = 0.0;
};

KernelQuadrature integrate_kernel(const LchsKernel& kernel, double M_cut, double frequency,
                                  double target, const std::function<CMatrix(double)>& f,
                                  std::int64_t max_nodes = std::int64_t{1} << 20);

// Truncated quadrature of gamma alone with the cutoff for eps / 2; lies in [1 - eps, 1].
// Both scalar checks allow 2^25 nodes, enough for eps down to about 1e-6.
double kernel_normalization(const LchsKernel& kernel, double epsilon);

// Largest |int gamma(eta) e^{-i eta x} - e^{-x}| over x in {0, 1, 2}.
double kernel_validation_error(const LchsKernel& kernel, double epsilon);

struct LchsOptions {
  LchsKernel kernel = LchsKernel::cauchy();
  std::int64_t max_nodes = std::int64_t{1} << 20;
};

// T exp(-int_0^t A) as int gamma(eta) T exp(-i int_0^t (eta A1 + A2)) d eta,
// truncated where the kernel tail drops below eps / 2. Requires A1 PSD on the
// audit grid. Constant and piecewise generators use exact exponentials; the
// polynomial kind uses the oracle at eps / 8 per node. The bound is eps.
EvolutionReport lchs_evolve(const Generator& gen, double t, double epsilon,
                            const LchsOptions& options = {});

struct TruncationPoint {
  double epsilon = 0.0;
  double M_cut = 0.0;
};

// Cutoff needed for each eps (descending) so the scalar tail stays below eps.
std::vector<TruncationPoint> lchs_truncation_probe(const std::vector<double>& epsilons,
                                                   const LchsKernel& kernel = LchsKernel::cauchy());

struct DensityState {
  CMatrix rho;
  Eigen::Index dim() const { return rho.rows(); }
};

// Dilation of du/dt = -A u into a master equation on dimension n + 1:
// H = blockdiag(A2, 0) and a single jump F = blockdiag(sqrt(2 A1), 0).
struct NdmeEmbedding {
  Eigen::Index dim = 0;
  Sampler hamiltonian;
  Sampler jump;
};

// Requires A1 PSD on the audit grid; F(t) raises NotPsdError below -1e-8.
NdmeEmbedding ndme_embed(const Generator& gen);

// [[u0 u0^dagger, u0], [u0^dagger, 1]].
DensityState ndme_initial_state(const CVector& u0);
// [[top_left, u0], [u0^dagger, 1]]; the readout does not depend on top_left.
DensityState ndme_initial_state(const CVector& u0, const CMatrix& top_left);
// Top-right column of rho, which carries u(t).
CVector ndme_readout(const DensityState& state);

struct LindbladOptions {
  double trace_tolerance = 1e-8;
};

// Classical RK4 with `steps` equal steps on
//   d rho/dt = -i [H, rho] + sum_i (F_i rho F_i^dagger - {rho, F_i^dagger F_i} / 2).
// Each step is symmetrized to keep rho Hermitian. An empty H means H = 0.
// Throws TraceDriftError when |tr rho(t) - tr rho(0)| exceeds the tolerance.
DensityState lindblad_evolve(const Sampler& hamiltonian, const std::vector<Sampler>& jumps,
                             const DensityState& rho0, double t, std::int64_t steps,
                             const LindbladOptions& options = {});

// ||rho(steps) - rho(2 steps)||, a step-size adequacy check.
double lindblad_step_defect(const Sampler& hamiltonian, const std::vector<Sampler>& jumps,
                            const DensityState& rho0, double t, std::int64_t steps);

struct InteractionPictureResult {
  std::vector<double> times;
  std::vector<CMatrix> rho_p;  // interaction-picture state at each time
  DensityState reconstructed;  // U_p(t) rho_p(t) U_p(t)^dagger
  DensityState direct;         // lindblad_evolve with the same steps
  double mismatch = 0.0;       // spectral norm of reconstructed - direct
};

// Evolves rho_p = U_p^dagger rho U_p under the jump-only equation with
// F_pi = U_p^dagger F_i U_p, U_p = T exp(-i int H), then reconstructs rho(t).
InteractionPictureResult interaction_picture(const Sampler& hamiltonian,
                                             const std::vector<Sampler>& jumps,
                                             const DensityState& rho0, double t,
                                             std::int64_t steps,
                                             const LindbladOptions& options = {});

// Propagator of du/dt = -A u assembled column by column from NDME runs on
// the basis vectors, against the oracle. Diagnostics carry the worst trace drift.
EvolutionReport ndme_evolve(const Generator& gen, double t, std::int64_t steps,
                            const LindbladOptions& options = {});

}  // namespace apskit
