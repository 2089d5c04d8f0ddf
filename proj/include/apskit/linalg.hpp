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

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace apskit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// A time-indexed matrix family, t -> M(t).
using Sampler = std::function<CMatrix(double)>;

inline constexpr Complex kI{0.0, 1.0};

// Hermitian and anti-Hermitian parts of a square matrix: A = dissipative + i*hamiltonian.
struct CartesianParts {
  CMatrix dissipative;
  CMatrix hamiltonian;
};

CartesianParts cartesian_split(const CMatrix& a);

// Throws DimensionError unless `m` is square (and, if dim > 0, of that size).
void require_square(const CMatrix& m, const char* what, Eigen::Index dim = -1);
void require_finite(const CMatrix& m, const char* what);

double spectral_norm(const CMatrix& m);
double hermiticity_defect(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = 1e-12);
bool is_anti_hermitian(const CMatrix& m, double tol = 1e-12);
CMatrix commutator(const CMatrix& a, const CMatrix& b);
CMatrix identity(Eigen::Index dim);

// Eigendecomposition of a Hermitian matrix, H = V diag(values) V^dagger.
class HermitianEigen {
 public:
  explicit HermitianEigen(const CMatrix& h);

  const RVector& values() const { return values_; }
  const CMatrix& vectors() const { return vectors_; }
  double min_value() const { return values_.size() ? values_.minCoeff() : 0.0; }
  double max_value() const { return values_.size() ? values_.maxCoeff() : 0.0; }

  // V diag(f(values)) V^dagger.
  CMatrix apply(const std::function<Complex(double)>& f) const;

 private:
  RVector values_;
  CMatrix vectors_;
};

// Matrix exponential. Hermitian and anti-Hermitian inputs use the eigenbasis;
// everything else uses scaling and squaring around a truncated Taylor core.
CMatrix expm(const CMatrix& m);
CMatrix expm_taylor(const CMatrix& m);

// Hermitian square root; eigenvalues in [-clamp, 0) are set to zero, anything
// below -clamp raises NotPsdError.
CMatrix hermitian_sqrt(const CMatrix& h, double clamp = 1e-8);

// Smallest eigenvalue of the Hermitian matrix h.
double min_eigenvalue(const CMatrix& h);

}  // namespace apskit
