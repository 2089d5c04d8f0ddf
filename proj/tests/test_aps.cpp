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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "apskit/aps.hpp"
#include "apskit/errors.hpp"
#include "apskit/oracle.hpp"
#include "test_support.hpp"

namespace apskit {
namespace {

using testing::random_dissipative;
using testing::random_hermitian;

CMatrix pauli_x() {
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  return x;
}

RVector sorted_eigenvalues(const CMatrix& h) { return HermitianEigen(h).values(); }

// A with [A1, A2] = 0: both parts diagonal in the same random unitary basis.
CMatrix random_normal(Eigen::Index dim, std::mt19937_64& rng) {
  const CMatrix q = Eigen::HouseholderQR<CMatrix>(testing::random_matrix(dim, rng)).householderQ();
  CVector d(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    d(j) = Complex(testing::uniform(rng, 0.0, 1.0), testing::uniform(rng, -1.0, 1.0));
  }
  return q * d.asDiagonal() * q.adjoint();
}

TEST(PhaseFactorization, CommutingPartsLeaveA1Unchanged) {
  std::mt19937_64 rng(31);
  const CMatrix a = random_normal(3, rng);
  const ApsFactorization f = phase_factorize(Generator::constant(a, 2.0), 1e-10);
  const CMatrix a1 = cartesian_split(a).dissipative;
  for (double t : {0.0, 0.5, 2.0}) EXPECT_LE(spectral_norm(f.rotated(t) - a1), 1e-13);
}

TEST(PhaseFactorization, ClosedFormPauliRotation) {
  CMatrix a1 = CMatrix::Zero(2, 2);
  a1(0, 0) = 1.0;
  const CMatrix a = a1 + kI * pauli_x();
  const ApsFactorization f = phase_factorize(Generator::constant(a, 3.0), 1e-10);
  for (double t : {0.3, 1.0, 2.7}) {
    // exp(i X t) = cos t I + i sin t X.
    const CMatrix rot = std::cos(t) * identity(2) + kI * std::sin(t) * pauli_x();
    const CMatrix expected = rot * a1 * rot.adjoint();
    EXPECT_LE((f.rotated(t) - expected).cwiseAbs().maxCoeff(), 1e-14) << t;
  }
}

TEST(PhaseFactorization, RotatedIsHermitianAndIsospectral) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::Index dim = 2 + trial;
    const Generator constant = Generator::constant(random_dissipative(dim, 2.0, rng), 1.0);
    const Generator poly = testing::random_polynomial_generator(dim, 1.0, 1.0, rng);
    for (const Generator& g : {constant, poly}) {
      const ApsFactorization f = phase_factorize(g, 1e-10);
      for (double t : {0.0, 0.37, 1.0}) {
        const CMatrix ap = f.rotated(t);
        EXPECT_LE(hermiticity_defect(ap), 1e-12);
        const RVector diff =
            sorted_eigenvalues(ap) - sorted_eigenvalues(g.split(t).dissipative);
        EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-10);
        const CMatrix u = f.integrator(t);
        EXPECT_LE(spectral_norm(u.adjoint() * u - identity(dim)), 1e-10);
      }
    }
  }
}

TEST(AmplitudeFactorization, ZeroHamiltonianGivesZeroRotation) {
  std::mt19937_64 rng(33);
  const ApsFactorization f =
      amplitude_factorize(Generator::constant(testing::random_psd(3, rng), 1.0), 1e-10);
  for (double t : {0.0, 0.5, 1.0}) EXPECT_EQ(f.rotated(t).norm(), 0.0);
}

TEST(AmplitudeFactorization, ConstantRotationsMatchExponentialProducts) {
  std::mt19937_64 rng(34);
  const CMatrix a = random_dissipative(3, 1.5, rng);
  const CartesianParts p = cartesian_split(a);
  const ApsFactorization f = amplitude_factorize(Generator::constant(a, 1.0), 1e-10);
  for (double t : {0.2, 1.0}) {
    const CMatrix decay = expm(p.dissipative * -t);
    const CMatrix grow = expm(p.dissipative * t);
    EXPECT_LE(spectral_norm(f.integrator(t) - decay), 1e-13);
    EXPECT_LE(spectral_norm(f.rotated(t) - grow * p.hamiltonian * decay), 1e-12);
    EXPECT_LE(spectral_norm(f.adjoint_rotated(t) - decay * p.hamiltonian * decay), 1e-12);
    EXPECT_LE(hermiticity_defect(f.adjoint_rotated(t)), 1e-13);
  }
}

TEST(AmplitudeFactorization, IsospectralWhenDissipationVanishes) {
  std::mt19937_64 rng(35);
  const CMatrix h = random_hermitian(4, rng);
  const ApsFactorization f = amplitude_factorize(Generator::constant(kI * h, 1.0), 1e-10);
  const CMatrix aa = f.rotated(0.8);
  EXPECT_LE(spectral_norm(aa - f.adjoint_rotated(0.8)), 1e-14);
  EXPECT_LE((sorted_eigenvalues(aa) - sorted_eigenvalues(h)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AmplitudeFactorization, RotatedIsSimilarToHamiltonianPart) {
  std::mt19937_64 rng(36);
  const CMatrix a = random_dissipative(3, 1.0, rng);
  const ApsFactorization f = amplitude_factorize(Generator::constant(a, 1.0), 1e-10);
  Eigen::ComplexEigenSolver<CMatrix> solver(f.rotated(1.0));
  std::vector<double> values;
  for (Eigen::Index j = 0; j < 3; ++j) values.push_back(solver.eigenvalues()(j).real());
  std::sort(values.begin(), values.end());
  const RVector expected = sorted_eigenvalues(cartesian_split(a).hamiltonian);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(values[j], expected(j), 1e-10);
}

TEST(VerifyIdentity, CommutingNormalCase) {
  std::mt19937_64 rng(37);
  const CMatrix a = random_normal(3, rng);
  const Generator g = Generator::constant(a, 1.0);
  for (const auto& f : {phase_factorize(g, 1e-9), amplitude_factorize(g, 1e-9)}) {
    const EvolutionReport r = verify_identity(f, 1.0, 1e-9);
    EXPECT_LE(r.error, 1e-9);
    EXPECT_LE(spectral_norm(r.reference - expm(-a)), 1e-9);
  }
}

TEST(VerifyIdentity, RandomNonNormal2x2) {
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 5; ++trial) {
    const Generator g = Generator::constant(testing::random_matrix(2, rng), 1.0);
    for (const auto& f : {phase_factorize(g, 1e-8), amplitude_factorize(g, 1e-8)}) {
      const EvolutionReport r = verify_identity(f, 1.0, 1e-8);
      EXPECT_TRUE(r.within_bound()) << r.method << " " << r.error;
    }
  }
}

TEST(VerifyIdentity, TimeZeroIsExactIdentity) {
  std::mt19937_64 rng(39);
  const Generator g = Generator::constant(testing::random_matrix(3, rng), 1.0);
  for (const auto& f : {phase_factorize(g, 1e-8), amplitude_factorize(g, 1e-8)}) {
    const EvolutionReport r = verify_identity(f, 0.0, 1e-8);
    EXPECT_EQ(r.approx, identity(3));
    EXPECT_EQ(r.reference, identity(3));
    EXPECT_EQ(r.error, 0.0);
  }
}

TEST(VerifyIdentity, PolynomialAndPiecewiseGenerators) {
  std::mt19937_64 rng(40);
  const Generator poly = testing::random_polynomial_generator(3, 1.0, 1.0, rng);
  const Generator pw = Generator::piecewise(
      {0.0, 0.3, 1.0}, {random_dissipative(3, 1.0, rng), random_dissipative(3, 2.0, rng)});
  for (const Generator& g : {poly, pw}) {
    for (const auto& f : {phase_factorize(g, 1e-8), amplitude_factorize(g, 1e-8)}) {
      const EvolutionReport r = verify_identity(f, 1.0, 1e-8);
      EXPECT_TRUE(r.within_bound()) << r.method << " " << r.error;
    }
  }
}

TEST(VerifyIdentity, AdjointRotationBreaksAmplitudeIdentity) {
  // With A1 != 0 the Hermitian variant U^dagger A2 U does not reproduce the
  // propagator; the inverse-based rotation does.
  std::mt19937_64 rng(41);
  const CMatrix a = random_dissipative(2, 1.5, rng);
  const ApsFactorization f = amplitude_factorize(Generator::constant(a, 1.0), 1e-9);
  OracleOptions options;
  options.tol = 1e-9;
  const CMatrix variant =
      f.integrator(1.0) *
      time_ordered_exp([&f](double s) { return CMatrix(kI * f.adjoint_rotated(s)); }, 0.0, 1.0,
                       options)
          .propagator;
  EXPECT_GT(spectral_norm(variant - expm(-a)), 1e-4);
  EXPECT_LE(verify_identity(f, 1.0, 1e-9).error, 1e-8);
}

TEST(ProductFormula, CommutingPartsAreExact) {
  std::mt19937_64 rng(42);
  const CMatrix a = random_normal(3, rng);
  for (int n : {1, 2, 7, 30}) EXPECT_LE(product_formula_check(a, 1.3, n), 1e-12);
}

TEST(ProductFormula, FirstOrderDecay) {
  std::mt19937_64 rng(43);
  const CMatrix a = random_dissipative(2, 2.0, rng);
  for (int n = 8; n <= 256; n *= 2) {
    EXPECT_LE(product_formula_check(a, 1.0, 2 * n), 0.6 * product_formula_check(a, 1.0, n)) << n;
  }
}

TEST(ProductFormula, TimeZero) {
  std::mt19937_64 rng(44);
  EXPECT_EQ(product_formula_check(testing::random_matrix(3, rng), 0.0, 5), 0.0);
  EXPECT_THROW(product_formula_check(identity(2), 1.0, 0), InvalidArgument);
}

}  // namespace
}  // namespace apskit
