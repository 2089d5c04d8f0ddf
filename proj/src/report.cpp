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

#include "apskit/report.hpp"

#include "apskit/errors.hpp"

namespace apskit {

const char* to_string(PlanMode mode) {
  return mode == PlanMode::kBound ? "bound" : "adaptive";
}

PlanMode plan_mode_from_string(const std::string& name) {
  if (name == "bound") return PlanMode::kBound;
  if (name == "adaptive") return PlanMode::kAdaptive;
  throw InvalidArgument("unknown plan mode '" + name + "'");
}

void finalize_error(EvolutionReport& report) {
  if (report.approx.rows() != report.reference.rows() ||
      report.approx.cols() != report.reference.cols()) {
    throw DimensionError("EvolutionReport: approx and reference shapes differ");
  }
  report.error = spectral_norm(report.approx - report.reference);
}

}  // namespace apskit
