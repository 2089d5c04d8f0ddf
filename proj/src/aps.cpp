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

#include "apskit/aps.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "apskit/errors.hpp"
#include "apskit/oracle.hpp"

namespace apskit {

namespace {

// Matrices B_j (or the smooth B) of dU/dt = B U for the integrator factor.
Propagator build_integrator(const Generator& gen, ApsFlavor flavor, double oracle_tol) {
  auto driver = [flavor](const CMatrix& a) -> CMatrix {
    const CartesianParts parts = cartesian_split(a);
    if (flavor == ApsFlavor::kPhaseDriven) return parts.hamiltonian * Complex(0.0, -1.0);
    return -parts.dissipative;
  };
  switch (gen.kind()) {
    case GeneratorKind::kConstant:
      return Propagator::piecewise_constant({0.0, gen.horizon()}, {driver(gen.coefficients().front())});
    case GeneratorKind::kPiecewiseConstant: {
      std::vector<CMatrix> pieces;
      for (const auto& p : gen.pieces()) pieces.push_back(driver(p));
      return Propagator::piecewise_constant(gen.breakpoints(), std::move(pieces));
    }
    case GeneratorKind::kPolynomial:
      break;
  }
  return Propagator::smooth([gen, driver](double t) { return driver(gen.sample(t)); }, gen.dim(),
                            gen.horizon(), oracle_tol / 10.0);
}

// Oracle over [0, t], split at the generator's breakpoints.
OracleResult oracle_on_pieces(const Sampler& g, const Generator& base, double t, double tol) {
  std::vector<double> cuts{0.0};
  if (base.kind() == GeneratorKind::kPiecewiseConstant) {
    for (std::size_t j = 1; j + 1 < base.breakpoints().size(); ++j) {
      if (base.breakpoints()[j] < t) cuts.push_back(base.breakpoints()[j]);
    }
  }
  cuts.push_back(t);
  OracleOptions options;
  options.tol = tol / static_cast<double>(cuts.size() - 1);
  OracleResult total{identity(base.dim()), 0.0, 0};
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double lo = cuts[j];
    const double hi = cuts[j + 1];
    OracleResult part = time_ordered_exp(g, lo, hi, options);
    total.propagator = part.propagator * total.propagator;
    total.defect += part.defect;
    total.steps += part.steps;
  }
  return total;
}

}  // namespace

const char* to_string(ApsFlavor flavor) {
  return flavor == ApsFlavor::kPhaseDriven ? "phase-driven" : "amplitude-driven";
}

CMatrix ApsFactorization::rotated(double t) const {
  const CartesianParts parts = base_.split(t);
  if (flavor_ == ApsFlavor::kPhaseDriven) {
    const CMatrix u = propagator_.at(t);
    return u.adjoint() * parts.dissipative * u;
  }
  return propagator_.inverse_at(t) * parts.hamiltonian * propagator_.at(t);
}

CMatrix ApsFactorization::adjoint_rotated(double t) const {
  if (flavor_ == ApsFlavor::kPhaseDriven) return rotated(t);
  const CMatrix u = propagator_.at(t);
  return u.adjoint() * base_.split(t).hamiltonian * u;
}

Sampler ApsFactorization::rotated_sampler() const {
  return [self = *this](double t) { return self.rotated(t); };
}

Sampler ApsFactorization::integrator_sampler() const {
  return [self = *this](double t) { return self.integrator(t); };
}

ApsFactorization phase_factorize(const Generator& gen, double oracle_tol) {
  return ApsFactorization(ApsFlavor::kPhaseDriven, gen,
                          build_integrator(gen, ApsFlavor::kPhaseDriven, oracle_tol));
}

ApsFactorization amplitude_factorize(const Generator& gen, double oracle_tol) {
  return ApsFactorization(ApsFlavor::kAmplitudeDriven, gen,
                          build_integrator(gen, ApsFlavor::kAmplitudeDriven, oracle_tol));
}

EvolutionReport verify_identity(const ApsFactorization& fact, double t, double oracle_tol) {
  const auto start = std::chrono::steady_clock::now();
  const Generator& base = fact.base();
  if (!(t >= 0.0) || t > base.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument("verify_identity: t outside [0, T]");
  }
  EvolutionReport report;
  report.method = std::string("aps-identity/") + to_string(fact.flavor());

  const OracleResult direct = time_ordered_exp(base, t, oracle_tol);
  Sampler remainder;
  if (fact.flavor() == ApsFlavor::kPhaseDriven) {
    remainder = fact.rotated_sampler();
  } else {
    remainder = [fact](double s) { return CMatrix(fact.rotated(s) * Complex(0.0, 1.0)); };
  }
  const OracleResult rotated = oracle_on_pieces(remainder, base, t, oracle_tol);

  report.approx = fact.integrator(t) * rotated.propagator;
  report.reference = direct.propagator;
  finalize_error(report);
  report.bound = 10.0 * oracle_tol;
  report.diagnostics["reference_defect"] = direct.defect;
  report.diagnostics["rotated_defect"] = rotated.defect;
  report.diagnostics["reference_steps"] = static_cast<double>(direct.steps);
  report.diagnostics["rotated_steps"] = static_cast<double>(rotated.steps);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double product_formula_check(const CMatrix& a, double t, int n) {
  require_square(a, "product_formula_check");
  if (n < 1) throw InvalidArgument("product_formula_check: n must be >= 1");
  const CartesianParts parts = cartesian_split(a);
  const double dt = t / n;
  const CMatrix step =
      expm(parts.hamiltonian * Complex(0.0, -dt)) * expm(parts.dissipative * (-dt));
  CMatrix product = identity(a.rows());
  for (int j = 0; j < n; ++j) product = step * product;
  return spectral_norm(product - expm(a * (-t)));
}

}  // namespace apskit
