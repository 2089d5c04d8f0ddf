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

#include "apskit/linalg.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "apskit/errors.hpp"

namespace apskit {

void require_square(const CMatrix& m, const char* what, Eigen::Index dim) {
  if (m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(msg.str());
  }
  if (dim >= 0 && m.rows() != dim) {
    std::ostringstream msg;
    msg << what << ": expected dimension " << dim << ", got " << m.rows();
    throw DimensionError(msg.str());
  }
}

void require_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entries");
  }
}

CartesianParts cartesian_split(const CMatrix& a) {
  require_square(a, "cartesian_split");
  const CMatrix adj = a.adjoint();
  return {(a + adj) * 0.5, (a - adj) * Complex(0.0, -0.5)};
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double hermiticity_defect(const CMatrix& m) {
  require_square(m, "hermiticity_defect");
  if (m.size() == 0) return 0.0;
  return spectral_norm(m - m.adjoint());
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_anti_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m + m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

HermitianEigen::HermitianEigen(const CMatrix& h) {
  require_square(h, "HermitianEigen");
  require_finite(h, "HermitianEigen");
  const CMatrix sym = (h + h.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NotConvergedError("HermitianEigen: eigensolver failed", 0.0);
  }
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

CMatrix HermitianEigen::apply(const std::function<Complex(double)>& f) const {
  CVector diag(values_.size());
  for (Eigen::Index j = 0; j < values_.size(); ++j) diag(j) = f(values_(j));
  return vectors_ * diag.asDiagonal() * vectors_.adjoint();
}

CMatrix expm_taylor(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const CMatrix x = m * std::ldexp(1.0, -squarings);

  // ||x||_1 <= 1/2, so the terms shrink at least geometrically.
  CMatrix sum = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().colwise().sum().maxCoeff() <= 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

CMatrix expm(const CMatrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  if (m.size() == 0) return m;
  if (is_hermitian(m, 1e-14)) {
    HermitianEigen eig(m);
    return eig.apply([](double v) { return Complex(std::exp(v), 0.0); });
  }
  if (is_anti_hermitian(m, 1e-14)) {
    HermitianEigen eig(m * Complex(0.0, -1.0));
    return eig.apply([](double v) { return std::polar(1.0, v); });
  }
  return expm_taylor(m);
}

CMatrix hermitian_sqrt(const CMatrix& h, double clamp) {
  HermitianEigen eig(h);
  if (eig.min_value() < -clamp) {
    throw NotPsdError("hermitian_sqrt: matrix is not positive semidefinite", eig.min_value());
  }
  return eig.apply([](double v) { return Complex(std::sqrt(std::max(v, 0.0)), 0.0); });
}

double min_eigenvalue(const CMatrix& h) { return HermitianEigen(h).min_value(); }

}  // namespace apskit
