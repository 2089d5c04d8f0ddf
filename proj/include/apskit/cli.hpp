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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apskit/complexity.hpp"
#include "apskit/generator.hpp"
#include "apskit/report.hpp"

namespace apskit::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitMethodFailure = 1,  // the method ran and failed, or missed its bound
  kExitInvalidConfig = 2,  // nothing was run
};

// Malformed input files and configs. Maps to kExitInvalidConfig.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigVersion = 1;

// Generator document: {"kind": "constant" | "piecewise" | "polynomial", "horizon": T,
// "matrix" | "pieces" + "breakpoints" | "coefficients"}. Matrix entries are numbers
// or [re, im] pairs.
Generator generator_from_json(const Json& doc);
Json generator_to_json(const Generator& gen);
CMatrix matrix_from_json(const Json& doc, const std::string& where);
Json matrix_to_json(const CMatrix& m);
Json read_json_file(const std::string& path);

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {
      "phase-aps-dyson", "amp-aps-ff", "lchs", "ndme", "gaussian-ff", "stochastic-ff", "oracle"};
  return names;
}

struct RunConfig {
  // Exactly one of generator_path and generator_inline is set.
  std::string generator_path;
  std::optional<Json> generator_inline;
  std::string method = "oracle";
  double t = 1.0;
  double epsilon = 1e-6;
  PlanMode mode = PlanMode::kAdaptive;
  std::uint64_t seed = 0;
  std::uint64_t samples = 10000;  // stochastic-ff draws
  std::int64_t steps = 4096;      // ndme integrator steps
  std::string out;                // empty writes the machine output to stdout
  std::string format = "json";    // json | csv

  bool operator==(const RunConfig&) const = default;
};

Json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& doc);
// Throws ConfigError naming the offending field.
void validate(const RunConfig& config);
Generator load_generator(const RunConfig& config);

// Deterministic report document; wall time is left to the metadata sidecar.
Json report_to_json(const EvolutionReport& report, const RunConfig& config, Eigen::Index dim);

inline constexpr const char* kSummaryHeader = "method,dim,t,eps,M,N_m,g,error,bound,wall_ms";
std::string summary_csv_line(const EvolutionReport& report, const RunConfig& config,
                             Eigen::Index dim, double norm_ratio);

// Runs one method. Library errors propagate.
EvolutionReport run_method(const Generator& gen, const RunConfig& config, unsigned threads);

// Thread cap from APSKIT_THREADS, else the hardware concurrency; at least 1.
unsigned thread_cap();

int cmd_evolve(const RunConfig& config, std::ostream& out, std::ostream& err);

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"aps-identities", "dyson-tail", "ff",
                                                 "embeddings", "all"};
  return names;
}

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// Runs a suite against the fixture files in fixture_dir. Throws ConfigError for
// an unknown suite; a fixture that cannot be read is a failed check.
std::vector<CheckResult> run_suite(const std::string& suite, const std::string& fixture_dir);
int cmd_verify(const std::string& suite, const std::string& fixture_dir, const std::string& out,
               std::ostream& stdout_stream, std::ostream& err);

// Scenario document: {"version": 1, "constants": {...}, "scenarios": [...]}.
struct ScenarioFile {
  ComplexityConstants constants;
  std::vector<Scenario> scenarios;
};
ScenarioFile scenarios_from_json(const Json& doc, const std::string& base_dir);
int cmd_table(const std::string& scenario_path, const std::string& out,
              std::ostream& stdout_stream, std::ostream& err);

std::string default_fixture_dir();

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace apskit::cli
