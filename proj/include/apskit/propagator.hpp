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
#include <memory>
#include <optional>
#include <vector>

#include "apskit/linalg.hpp"

namespace apskit {

// s -> exp(B s) for a fixed matrix B, exact in the eigenbasis when B is
// Hermitian or anti-Hermitian.
class ExpFamily {
 public:
  explicit ExpFamily(const CMatrix& b);
  CMatrix at(double s) const;

 private:
  enum class Mode { kHermitian, kAntiHermitian, kGeneral };
  Mode mode_ = Mode::kGeneral;
  std::optional<HermitianEigen> eig_;
  CMatrix b_;
};

// U(t) solving dU/dt = B(t) U, U(0) = I on [0, horizon], and its inverse.
// Values on the internal grid are computed once at construction, so the
// object is immutable and safe to share between threads.
class Propagator {
 public:
  // B constant on [breakpoints[j], breakpoints[j+1]).
  static Propagator piecewise_constant(std::vector<double> breakpoints,
                                       std::vector<CMatrix> pieces);
  // Smooth B: fourth-order Magnus steps on a uniform grid, refined until
  // halving the grid changes U(horizon) by less than tol / 10.
  static Propagator smooth(Sampler b, Eigen::Index dim, double horizon, double tol,
                           std::int64_t max_steps = std::int64_t{1} << 16);

  CMatrix at(double t) const;
  CMatrix inverse_at(double t) const;
  double horizon() const;
  // Grid steps of the smooth integrator; 0 for piecewise-constant input.
  std::int64_t grid_steps() const;

 private:
  struct Impl;
  explicit Propagator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// Fourth-order Magnus exponent for one step [t0, t0 + dt] of dU/dt = B(t) U.
CMatrix magnus4_exponent(const Sampler& b, double t0, double dt);

}  // namespace apskit
