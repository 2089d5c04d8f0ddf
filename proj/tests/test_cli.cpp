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


#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "apskit/cli.hpp"
#include "test_support.hpp"

namespace apskit::cli {
namespace {

namespace fs = std::filesystem;

const std::string kSourceDir = APSKIT_SOURCE_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("apskit_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run_args(std::vector<std::string> args) {
    args.insert(args.begin(), "apskit");
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

Json scalar_generator(double value, double horizon) {
  return {{"kind", "constant"}, {"horizon", horizon}, {"matrix", Json::array({Json::array({value})})}};
}

TEST(RunConfigJson, RoundTripsUnchanged) {
  RunConfig c;
  c.generator_path = "gens/a.json";
  c.method = "stochastic-ff";
  c.t = 0.75;
  c.epsilon = 3e-7;
  c.mode = PlanMode::kBound;
  c.seed = 18446744073709551615ull;
  c.samples = 12345;
  c.steps = 99;
  c.out = "r.json";
  c.format = "csv";
  EXPECT_EQ(run_config_from_json(run_config_to_json(c)), c);
  EXPECT_EQ(run_config_from_json(Json::parse(run_config_to_json(c).dump())), c);

  RunConfig inline_config;
  inline_config.generator_inline = scalar_generator(1.0, 2.0);
  EXPECT_EQ(run_config_from_json(Json::parse(run_config_to_json(inline_config).dump())), inline_config);
}

TEST(RunConfigJson, RejectsBadFields) {
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"method": "oracle"})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"generator": 3})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"generator": "g", "t": "one"})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"generator": "g", "mode": "fast"})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"generator": "g", "seed": -1})")), ConfigError);
  EXPECT_THROW(run_config_from_json(Json::parse(R"({"generator": "g", "version": 7})")), ConfigError);
}

TEST(GeneratorJson, RoundTripsEveryKind) {
  std::mt19937_64 rng(5);
  const CMatrix a = testing::random_dissipative(3, 1.0, rng);
  const CMatrix b = testing::random_dissipative(3, 1.0, rng);
  const std::vector<Generator> gens = {Generator::constant(a, 2.0),
                                       Generator::polynomial({a, b}, 1.5),
                                       Generator::piecewise({0.0, 0.5, 1.0}, {a, b})};
  for (const Generator& g : gens) {
    const Generator back = generator_from_json(Json::parse(generator_to_json(g).dump()));
    EXPECT_EQ(back.kind(), g.kind());
    EXPECT_DOUBLE_EQ(back.horizon(), g.horizon());
    for (double t : {0.0, 0.3, 0.9}) EXPECT_EQ(back.sample(t), g.sample(t));
  }
}

TEST(GeneratorJson, RejectsMalformedDocuments) {
  EXPECT_THROW(generator_from_json(Json::parse(R"({"kind": "constant", "horizon": 1})")), ConfigError);
  EXPECT_THROW(generator_from_json(Json::parse(R"({"kind": "spline", "horizon": 1})")), ConfigError);
  EXPECT_THROW(generator_from_json(Json::parse(
                   R"({"kind": "constant", "horizon": 1, "matrix": [[1, 2]]})")),
               ConfigError);
  EXPECT_THROW(generator_from_json(Json::parse(
                   R"({"kind": "constant", "horizon": 1, "matrix": [["x"]]})")),
               ConfigError);
  EXPECT_THROW(generator_from_json(Json::parse(
                   R"({"kind": "piecewise", "breakpoints": [0.5, 1], "pieces": [[[1]]]})")),
               ConfigError);
}

TEST_F(CliTest, OracleOnScalarDecay) {
  const std::string gen = write("g.json", scalar_generator(1.0, 1.0).dump());
  ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", "oracle", "--t", "1",
                      "--out", path("r.json")}),
            kExitOk)
      << err_.str();
  const Json report = Json::parse(read(path("r.json")));
  EXPECT_NEAR(report["approx"][0][0][0].get<double>(), std::exp(-1.0), 1e-8);
  EXPECT_DOUBLE_EQ(report["approx"][0][0][1].get<double>(), 0.0);
  EXPECT_TRUE(report["bound"].is_null());
}

TEST_F(CliTest, PhaseDysonOnRandomGeneratorMeetsTolerance) {
  std::mt19937_64 rng(2024);
  const Generator g = Generator::constant(testing::random_dissipative(4, 1.5, rng), 1.0);
  const std::string gen = write("g.json", generator_to_json(g).dump());
  ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", "phase-aps-dyson", "--eps", "1e-6",
                      "--out", path("r.json")}),
            kExitOk)
      << err_.str();
  const Json report = Json::parse(read(path("r.json")));
  EXPECT_LE(report["error"].get<double>(), 1e-6);
  EXPECT_EQ(report["plan"]["mode"], "adaptive");
  EXPECT_NE(out_.str().find("phase-aps-dyson"), std::string::npos);
}

TEST_F(CliTest, MalformedGeneratorExitsTwoWithoutOutput) {
  const std::string gen = write("g.json", "{\"kind\": \"constant\", \"matrix\": [[1]");
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--out", path("r.json")}), kExitInvalidConfig);
  EXPECT_FALSE(fs::exists(path("r.json")));
  EXPECT_FALSE(fs::exists(path("r.json.meta.json")));
  EXPECT_NE(err_.str().find("not valid JSON"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigsExitTwo) {
  const std::string gen = write("g.json", scalar_generator(1.0, 1.0).dump());
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--method", "magic"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--eps", "1.5"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--t", "3"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--t", "-1"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--mode", "fast"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", path("missing.json")}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"frobnicate"}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--bogus"}), kExitInvalidConfig);
}

TEST_F(CliTest, MethodFailuresExitOneWithModuleText) {
  const std::string gen = write("g.json", scalar_generator(-1.0, 1.0).dump());
  EXPECT_EQ(run_args({"evolve", "--generator", gen, "--method", "phase-aps-dyson"}), kExitMethodFailure);
  EXPECT_NE(err_.str().find("positive semidefinite"), std::string::npos);
  const Json poly = {{"kind", "polynomial"},
                     {"horizon", 1.0},
                     {"coefficients", Json::array({Json::array({Json::array({1.0})}),
                                                   Json::array({Json::array({0.5})})})}};
  const std::string pgen = write("p.json", poly.dump());
  EXPECT_EQ(run_args({"evolve", "--generator", pgen, "--method", "amp-aps-ff"}), kExitMethodFailure);
  EXPECT_NE(err_.str().find("constant generator"), std::string::npos);
}

TEST_F(CliTest, ReportsAreByteIdenticalAndTimingIsInTheSidecar) {
  std::mt19937_64 rng(31);
  const Generator g = Generator::constant(testing::random_dissipative(3, 1.0, rng), 1.0);
  const std::string gen = write("g.json", generator_to_json(g).dump());
  for (const char* method : {"amp-aps-ff", "lchs"}) {
    ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", method, "--eps", "1e-4", "--out",
                        path("a.json")}),
              kExitOk);
    ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", method, "--eps", "1e-4", "--out",
                        path("b.json")}),
              kExitOk);
    EXPECT_EQ(read(path("a.json")), read(path("b.json"))) << method;
    const Json meta = Json::parse(read(path("a.json.meta.json")));
    EXPECT_TRUE(meta.contains("wall_ms"));
    EXPECT_EQ(read(path("a.json")).find("wall"), std::string::npos);
  }
}

TEST_F(CliTest, StochasticReportIgnoresThreadCap) {
  const Json pw = {{"kind", "piecewise"},
                   {"breakpoints", {0.0, 0.5, 1.0}},
                   {"pieces", Json::array({Json::array({Json::array({1.0, 0.2}), Json::array({0.2, 0.5})}),
                                           Json::array({Json::array({0.3, 0.0}), Json::array({0.0, 1.2})})})}};
  const std::string gen = write("g.json", pw.dump());
  std::vector<std::string> bodies;
  for (const char* threads : {"1", "3"}) {
    ::setenv("APSKIT_THREADS", threads, 1);
    EXPECT_EQ(thread_cap() <= static_cast<unsigned>(std::atoi(threads)), true);
    ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", "stochastic-ff", "--samples",
                        "4000", "--seed", "7", "--out", path("s.json")}),
              kExitOk)
        << err_.str();
    bodies.push_back(read(path("s.json")));
  }
  ::unsetenv("APSKIT_THREADS");
  EXPECT_EQ(bodies[0], bodies[1]);
}

TEST_F(CliTest, CsvSummaryHasTheDocumentedColumns) {
  const std::string gen = write("g.json", scalar_generator(0.5, 2.0).dump());
  ASSERT_EQ(run_args({"evolve", "--generator", gen, "--method", "gaussian-ff", "--t", "2", "--format",
                      "csv"}),
            kExitOk);
  std::istringstream lines(out_.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, kSummaryHeader);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);
  EXPECT_EQ(row.rfind("gaussian-ff,1,2,", 0), 0u);
}

TEST_F(CliTest, ConfigFileAndFlagOverrides) {
  RunConfig c;
  c.generator_inline = scalar_generator(2.0, 1.0);
  c.method = "oracle";
  c.t = 0.5;
  const std::string config = write("c.json", run_config_to_json(c).dump());
  ASSERT_EQ(run_args({"evolve", "--config", config, "--print-config"}), kExitOk);
  EXPECT_EQ(run_config_from_json(Json::parse(out_.str())), c);
  ASSERT_EQ(run_args({"evolve", "--config", config, "--t", "1", "--print-config"}), kExitOk);
  EXPECT_DOUBLE_EQ(run_config_from_json(Json::parse(out_.str())).t, 1.0);
  ASSERT_EQ(run_args({"evolve", "--config", config}), kExitOk);
  EXPECT_NEAR(Json::parse(out_.str())["approx"][0][0][0].get<double>(), std::exp(-1.0), 1e-8);
}

TEST_F(CliTest, VerifySuites) {
  const std::string fixtures = kSourceDir + "/fixtures";
  EXPECT_EQ(run_args({"verify", "aps-identities", "--fixtures", fixtures, "--out", path("v.json")}),
            kExitOk);
  const Json doc = Json::parse(read(path("v.json")));
  EXPECT_TRUE(doc["passed"].get<bool>());
  EXPECT_GE(doc["checks"].size(), 15u);
  EXPECT_EQ(run_args({"verify", "nonsense", "--fixtures", fixtures}), kExitInvalidConfig);
  EXPECT_EQ(run_args({"verify", "ff", "--fixtures", path("empty")}), kExitMethodFailure);
}

TEST_F(CliTest, VerifyAllFailsOnACorruptedFixture) {
  const fs::path copy = dir_ / "fixtures";
  fs::create_directories(copy);
  for (const auto& entry : fs::directory_iterator(kSourceDir + "/fixtures")) {
    fs::copy_file(entry.path(), copy / entry.path().filename());
  }
  Json doc = Json::parse(read((copy / "nonnormal-2x2.json").string()));
  doc["propagator"][0][1][0] = doc["propagator"][0][1][0].get<double>() + 1e-3;
  std::ofstream((copy / "nonnormal-2x2.json").string()) << doc.dump();
  EXPECT_EQ(run_args({"verify", "all", "--fixtures", copy.string(), "--out", path("v.json")}),
            kExitMethodFailure);
  const Json result = Json::parse(read(path("v.json")));
  EXPECT_FALSE(result["passed"].get<bool>());
  int failures = 0;
  for (const Json& c : result["checks"]) {
    if (!c["passed"].get<bool>()) {
      ++failures;
      EXPECT_NE(c["name"].get<std::string>().find("nonnormal-2x2"), std::string::npos);
    }
  }
  EXPECT_GE(failures, 1);
}

TEST_F(CliTest, TableFromTheShippedScenarios) {
  ASSERT_EQ(run_args({"table", kSourceDir + "/scenarios/default.json", "--out", path("t.csv")}),
            kExitOk)
      << err_.str();
  const std::string csv = read(path("t.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 5);
  EXPECT_EQ(csv.rfind("scenario,method,dim,t,eps,M,N_m,g,queries,error,bound,wall_ms,note\n", 0), 0u);
}

TEST_F(CliTest, TableEdgeCases) {
  const std::string empty = write("empty.json", R"({"version": 1, "scenarios": []})");
  ASSERT_EQ(run_args({"table", empty}), kExitOk);
  EXPECT_EQ(out_.str(), "scenario,method,dim,t,eps,M,N_m,g,queries,error,bound,wall_ms,note\n");
  const std::string negative = write(
      "neg.json",
      R"({"scenarios": [{"name": "x", "a_max": 1, "a1_max": 1, "a2_max": 0, "t": -1, "epsilon": 1e-6}]})");
  EXPECT_EQ(run_args({"table", negative, "--out", path("t.csv")}), kExitInvalidConfig);
  EXPECT_FALSE(fs::exists(path("t.csv")));
  const std::string missing_norms = write("m.json", R"({"scenarios": [{"name": "x", "t": 1, "epsilon": 1e-6}]})");
  EXPECT_EQ(run_args({"table", missing_norms}), kExitInvalidConfig);
}

TEST_F(CliTest, TableComputesTheNormRatioFromAnInitialState) {
  const Json doc = {{"scenarios", Json::array({{{"name", "decay"},
                                                {"generator", scalar_generator(1.0, 2.0)},
                                                {"t", 2.0},
                                                {"epsilon", 1e-4},
                                                {"u0", Json::array({3.0})}}})}};
  const ScenarioFile file = scenarios_from_json(doc, ".");
  ASSERT_EQ(file.scenarios.size(), 1u);
  EXPECT_NEAR(file.scenarios[0].norm_ratio, std::exp(2.0), 1e-7);
  EXPECT_DOUBLE_EQ(file.scenarios[0].a1_max, 1.0);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run_args({"--help"}), kExitOk); }

}  // namespace
}  // namespace apskit::cli
