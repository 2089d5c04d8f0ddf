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


#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "apskit/cli.hpp"

#ifndef APSKIT_DEFAULT_FIXTURES
#define APSKIT_DEFAULT_FIXTURES "fixtures"
#endif

namespace apskit::cli {

std::string default_fixture_dir() {
  if (const char* env = std::getenv("APSKIT_FIXTURES")) return env;
  return APSKIT_DEFAULT_FIXTURES;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Amplitude-phase separation toolkit for du/dt = -A(t) u"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path, mode_text;
  bool print_config = false;
  CLI::App* evolve = app.add_subcommand("evolve", "Run one method and report its error");
  evolve->add_option("--config", config_path, "RunConfig JSON; flags override its fields");
  auto* gen_opt = evolve->add_option("--generator", flags.generator_path, "Generator JSON file");
  auto* method_opt = evolve->add_option("--method", flags.method, "Method name")
                         ->check(CLI::IsMember(method_names()));
  auto* t_opt = evolve->add_option("--t", flags.t, "Evolution time");
  auto* eps_opt = evolve->add_option("--eps", flags.epsilon, "Target accuracy");
  auto* mode_opt = evolve->add_option("--mode", mode_text, "Grid rule")
                       ->check(CLI::IsMember({"bound", "adaptive"}));
  auto* seed_opt = evolve->add_option("--seed", flags.seed, "Stochastic seed");
  auto* samples_opt = evolve->add_option("--samples", flags.samples, "Stochastic sample count");
  auto* steps_opt = evolve->add_option("--steps", flags.steps, "Lindblad integrator steps");
  auto* out_opt = evolve->add_option("--out", flags.out, "Report path; stdout when omitted");
  auto* format_opt = evolve->add_option("--format", flags.format, "Report format")
                         ->check(CLI::IsMember({"json", "csv"}));
  evolve->add_flag("--print-config", print_config, "Print the resolved RunConfig and exit");

  std::string suite, fixtures = default_fixture_dir(), verify_out;
  CLI::App* verify = app.add_subcommand("verify", "Run an invariant suite on the fixtures");
  verify->add_option("suite", suite, "aps-identities, dyson-tail, ff, embeddings or all")->required();
  verify->add_option("--fixtures", fixtures, "Fixture directory");
  verify->add_option("--out", verify_out, "Pass/fail JSON path; stdout when omitted");

  std::string scenario_path, table_out;
  CLI::App* table = app.add_subcommand("table", "Query-count comparison table as CSV");
  table->add_option("scenarios", scenario_path, "Scenario JSON file")->required();
  table->add_option("--out", table_out, "CSV path; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "apskit: " << e.what() << '\n';
    return kExitInvalidConfig;
  }

  if (verify->parsed()) return cmd_verify(suite, fixtures, verify_out, out, err);
  if (table->parsed()) return cmd_table(scenario_path, table_out, out, err);

  RunConfig config = flags;
  try {
    if (!config_path.empty()) {
      config = run_config_from_json(read_json_file(config_path));
      if (gen_opt->count()) {
        config.generator_path = flags.generator_path;
        config.generator_inline.reset();
      }
      if (method_opt->count()) config.method = flags.method;
      if (t_opt->count()) config.t = flags.t;
      if (eps_opt->count()) config.epsilon = flags.epsilon;
      if (seed_opt->count()) config.seed = flags.seed;
      if (samples_opt->count()) config.samples = flags.samples;
      if (steps_opt->count()) config.steps = flags.steps;
      if (out_opt->count()) config.out = flags.out;
      if (format_opt->count()) config.format = flags.format;
    }
    if (mode_opt->count()) config.mode = mode_text == "bound" ? PlanMode::kBound : PlanMode::kAdaptive;
    if (print_config) {
      out << run_config_to_json(config).dump(2) << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "apskit evolve: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  return cmd_evolve(config, out, err);
}

}  // namespace apskit::cli
