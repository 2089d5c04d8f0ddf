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

#include "apskit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apskit/errors.hpp"

namespace apskit {

CMatrix midpoint_product(const Sampler& generator, double t0, double t1, std::int64_t steps) {
  const double dt = (t1 - t0) / static_cast<double>(steps);
  CMatrix u;
  for (std::int64_t j = 0; j < steps; ++j) {
    const double mid = t0 + (static_cast<double>(j) + 0.5) * dt;
    const CMatrix g = generator(mid);
    require_square(g, "time_ordered_exp: sampled generator");
    require_finite(g, "time_ordered_exp: sampled generator");
    const CMatrix factor = expm_taylor(g * (-dt));
    u = j == 0 ? factor : CMatrix(factor * u);
  }
  return u;
}

OracleResult time_ordered_exp(const Sampler& generator, double t0, double t1,
                              const OracleOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("time_ordered_exp: tol must be positive");
  if (!(t1 >= t0)) throw InvalidArgument("time_ordered_exp: need t1 >= t0");
  const CMatrix probe = generator(t0);
  require_square(probe, "time_ordered_exp: sampled generator");
  if (t1 == t0) return {identity(probe.rows()), 0.0, 0};

  std::int64_t steps = std::max<std::int64_t>(1, options.initial_steps);
  CMatrix previous = midpoint_product(generator, t0, t1, steps);
  double defect = std::numeric_limits<double>::infinity();
  while (steps * 2 <= options.max_steps) {
    steps *= 2;
    CMatrix current = midpoint_product(generator, t0, t1, steps);
    defect = spectral_norm(current - previous);
    previous = std::move(current);
    if (defect < options.tol / 10.0) return {previous, defect, steps};
  }
  std::ostringstream msg;
  msg << "oracle not converged: defect " << defect << " after " << steps << " steps (tol "
      << options.tol << ")";
  throw NotConvergedError(msg.str(), defect);
}

OracleResult time_ordered_exp(const Generator& gen, double t, double tol) {
  if (!(t >= 0.0) || t > gen.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument("time_ordered_exp: t outside [0, T]");
  }
  OracleOptions options;
  options.tol = tol;
  if (gen.kind() != GeneratorKind::kPiecewiseConstant) {
    return time_ordered_exp(gen.sampler(), 0.0, t, options);
  }
  // Each piece is constant, so the oracle is applied piece by piece.
  OracleResult total{identity(gen.dim()), 0.0, 0};
  const auto& bp = gen.breakpoints();
  std::size_t active = 0;
  while (active + 1 < bp.size() && bp[active] < t) ++active;
  options.tol = tol / static_cast<double>(std::max<std::size_t>(active, 1));
  for (std::size_t j = 0; j + 1 < bp.size() && bp[j] < t; ++j) {
    const double lo = bp[j];
    const double hi = std::min(bp[j + 1], t);
    const CMatrix piece = gen.pieces()[j];
    OracleResult part =
        time_ordered_exp([piece](double) { return piece; }, lo, hi, options);
    total.propagator = part.propagator * total.propagator;
    total.defect += part.defect;
    total.steps += part.steps;
  }
  return total;
}

}  // namespace apskit
