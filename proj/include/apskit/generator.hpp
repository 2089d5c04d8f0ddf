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

#include <string>
#include <vector>

#include "apskit/linalg.hpp"

namespace apskit {

enum class GeneratorKind { kConstant, kPiecewiseConstant, kPolynomial };

const char* to_string(GeneratorKind kind);

// Norm bounds over [0, T]. Every field is a guaranteed bound in its direction:
// maxima are upper bounds and the eigenvalue floor is a lower bound.
struct GeneratorBounds {
  double a_max = 0.0;
  double a1_max = 0.0;
  double a2_max = 0.0;
  // sup ||dA1/dt||; +inf when the family is not differentiable.
  double a1_rate_max = 0.0;
  bool rate_applicable = true;
  // inf over t of the smallest eigenvalue of A1(t).
  double a1_min_eigenvalue = 0.0;
};

// A(t) on [0, T] for the problem du/dt = -A(t) u.
class Generator {
 public:
  static Generator constant(CMatrix a, double horizon);
  // Piece j is active on [breakpoints[j], breakpoints[j+1]); the last piece
  // also owns the right endpoint. breakpoints.front() must be 0.
  static Generator piecewise(std::vector<double> breakpoints, std::vector<CMatrix> pieces);
  // A(t) = sum_k coefficients[k] * t^k.
  static Generator polynomial(std::vector<CMatrix> coefficients, double horizon);

  GeneratorKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double horizon() const { return horizon_; }
  const GeneratorBounds& bounds() const { return bounds_; }

  CMatrix sample(double t) const;
  CMatrix derivative(double t) const;
  CartesianParts split(double t) const { return cartesian_split(sample(t)); }

  // Piecewise data; breakpoints has pieces().size() + 1 entries.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<CMatrix>& pieces() const { return matrices_; }
  // Polynomial coefficients, or the single matrix of a constant generator.
  const std::vector<CMatrix>& coefficients() const { return matrices_; }

  // Copy of this generator with horizon replaced (constant and polynomial kinds).
  Generator with_horizon(double horizon) const;

  Sampler sampler() const;

 private:
  Generator() = default;
  void check_time(double t) const;
  void compute_bounds();

  GeneratorKind kind_ = GeneratorKind::kConstant;
  Eigen::Index dim_ = 0;
  double horizon_ = 0.0;
  std::vector<double> breakpoints_;
  std::vector<CMatrix> matrices_;
  GeneratorBounds bounds_;
};

struct BoundAudit {
  int grid_points = 0;
  double a_max = 0.0;
  double a1_max = 0.0;
  double a2_max = 0.0;
  double a1_rate_max = 0.0;
  double a1_min_eigenvalue = 0.0;
  // Names of cached bounds that the grid values exceed.
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Dense uniform-grid audit of a generator's norms. Derivative norms come from
// forward differences of A1 between neighbouring grid points.
BoundAudit audit_bounds(const Generator& gen, int grid_points);

}  // namespace apskit
