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

// Helpers shared by the evaluator translation units. Not installed.

#include <chrono>
#include <cmath>
#include <string>

#include "apskit/dyson.hpp"
#include "apskit/errors.hpp"
#include "apskit/report.hpp"

namespace apskit::detail {

// Eigenvalue floor accepted as positive semidefinite.
inline constexpr double kPsdTolerance = 1e-8;

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline void check_epsilon(double epsilon, const char* what) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw InvalidArgument(std::string(what) + ": epsilon must lie in (0, 1)");
  }
}

inline void check_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidArgument(std::string(what) + ": t must be finite and nonnegative");
  }
}

// Stores the plan with the grid actually evaluated, plus refinement diagnostics.
inline void attach_series(EvolutionReport& report, const SeriesPlan& plan,
                          const SeriesEvaluation& ev) {
  SeriesPlan used = plan;
  used.N_m = ev.N_m;
  used.h = ev.N_m > 0 ? plan.t / static_cast<double>(ev.N_m) : 0.0;
  report.plan = used;
  report.diagnostics["grid_levels"] = ev.levels;
  report.diagnostics["last_change"] = ev.last_change;
  report.diagnostics["coefficient_weight"] = ev.coefficient_weight;
}

}  // namespace apskit::detail
