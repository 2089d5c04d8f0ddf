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

#include "apskit/generator.hpp"
#include "apskit/linalg.hpp"

namespace apskit {

struct OracleOptions {
  // Stop once two successive refinements differ by less than tol / 10.
  double tol = 1e-8;
  std::int64_t max_steps = std::int64_t{1} << 20;
  std::int64_t initial_steps = 1;
};

struct OracleResult {
  CMatrix propagator;
  // Spectral-norm difference between the last two refinements.
  double defect = 0.0;
  std::int64_t steps = 0;
};

// Midpoint product prod_j exp(-G(mid_j) dt) for T exp(-int_{t0}^{t1} G(s) ds),
// with later times on the left. Steps double until the defect criterion
// holds; NotConvergedError carries the last defect otherwise.
OracleResult time_ordered_exp(const Sampler& generator, double t0, double t1,
                              const OracleOptions& options = {});

// Same for a Generator on [0, t]; piecewise generators are integrated piece by
// piece so no midpoint straddles a jump.
OracleResult time_ordered_exp(const Generator& gen, double t, double tol);

// One fixed-resolution midpoint product with `steps` equal steps.
CMatrix midpoint_product(const Sampler& generator, double t0, double t1, std::int64_t steps);

}  // namespace apskit
