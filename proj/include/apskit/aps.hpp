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

#include "apskit/generator.hpp"
#include "apskit/linalg.hpp"
#include "apskit/propagator.hpp"
#include "apskit/report.hpp"

namespace apskit {

enum class ApsFlavor { kPhaseDriven, kAmplitudeDriven };

const char* to_string(ApsFlavor flavor);

// Splits T exp(-int A) into an integrator factor and a rotated remainder.
//   phase-driven:     U(t) = T exp(-i int A2),  rotated(t) = U^dagger A1 U,
//                     T exp(-int A) = U(t) T exp(-int rotated)
//   amplitude-driven: U(t) = T exp(-int A1),    rotated(t) = U^{-1} A2 U,
//                     T exp(-int A) = U(t) T exp(-i int rotated)
class ApsFactorization {
 public:
  ApsFlavor flavor() const { return flavor_; }
  const Generator& base() const { return base_; }
  const Propagator& propagator() const { return propagator_; }

  CMatrix integrator(double t) const { return propagator_.at(t); }
  CMatrix integrator_inverse(double t) const { return propagator_.inverse_at(t); }
  CMatrix rotated(double t) const;
  // U^dagger A2 U for the amplitude flavor: Hermitian, but the identity above
  // fails with it whenever A1 != 0. Phase flavor returns rotated(t).
  CMatrix adjoint_rotated(double t) const;

  Sampler rotated_sampler() const;
  Sampler integrator_sampler() const;

 private:
  friend ApsFactorization phase_factorize(const Generator& gen, double oracle_tol);
  friend ApsFactorization amplitude_factorize(const Generator& gen, double oracle_tol);
  ApsFactorization(ApsFlavor flavor, Generator base, Propagator propagator)
      : flavor_(flavor), base_(std::move(base)), propagator_(std::move(propagator)) {}

  ApsFlavor flavor_;
  Generator base_;
  Propagator propagator_;
};

ApsFactorization phase_factorize(const Generator& gen, double oracle_tol);
ApsFactorization amplitude_factorize(const Generator& gen, double oracle_tol);

// Compares U(t) * (oracle on the rotated generator) with the oracle on the
// base generator. approx is the assembled product, reference the direct
// oracle, and the bound is 10 * oracle_tol.
EvolutionReport verify_identity(const ApsFactorization& fact, double t, double oracle_tol);

// || (exp(-i A2 t/n) exp(-A1 t/n))^n - exp(-A t) ||.
double product_formula_check(const CMatrix& a, double t, int n);

}  // namespace apskit
