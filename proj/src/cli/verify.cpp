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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "apskit/aps.hpp"
#include "apskit/cli.hpp"
#include "apskit/dyson.hpp"
#include "apskit/embeddings.hpp"
#include "apskit/errors.hpp"
#include "apskit/fastforward.hpp"
#include "apskit/oracle.hpp"

namespace apskit::cli {

namespace {

constexpr double kOracleTol = 1e-8;
constexpr double kFixtureTol = 1e-7;  // stored propagators are written at 1e-12

struct Fixture {
  std::string name;
  double t = 0.0;
  std::optional<Generator> gen;
  CMatrix propagator;
  std::string load_error;  // nonempty when the file could not be used
};

std::vector<Fixture> load_fixtures(const std::string& dir) {
  std::vector<std::filesystem::path> paths;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Fixture> fixtures;
  for (const auto& path : paths) {
    Fixture f;
    f.name = path.stem().string();
    try {
      const Json doc = read_json_file(path.string());
      if (!doc.contains("t") || !doc["t"].is_number()) throw ConfigError("missing number 't'");
      if (!doc.contains("generator") || !doc.contains("propagator")) {
        throw ConfigError("needs 'generator' and 'propagator'");
      }
      f.t = doc["t"].get<double>();
      f.gen = generator_from_json(doc["generator"]);
      f.propagator = matrix_from_json(doc["propagator"], f.name + ".propagator");
      if (f.propagator.rows() != f.gen->dim()) throw ConfigError("propagator dimension mismatch");
    } catch (const std::exception& e) {
      f.load_error = e.what();
    }
    fixtures.push_back(std::move(f));
  }
  return fixtures;
}

class Recorder {
 public:
  explicit Recorder(std::string suite) : suite_(std::move(suite)) {}

  // Passes when measure() <= tolerance; exceptions fail the check.
  void check(const std::string& name, double tolerance, const std::function<double()>& measure) {
    CheckResult r{suite_, name, false, 0.0, tolerance, ""};
    try {
      r.value = measure();
      r.passed = r.value <= tolerance;
    } catch (const std::exception& e) {
      r.value = std::nan("");
      r.detail = e.what();
    }
    results_.push_back(std::move(r));
  }

  void fail(const std::string& name, const std::string& detail) {
    results_.push_back({suite_, name, false, std::nan(""), 0.0, detail});
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::string suite_;
  std::vector<CheckResult> results_;
};

// Usable fixtures; unusable ones become failed checks.
std::vector<const Fixture*> usable(const std::vector<Fixture>& fixtures, Recorder& rec) {
  std::vector<const Fixture*> out;
  if (fixtures.empty()) rec.fail("fixtures", "no fixture files found");
  for (const Fixture& f : fixtures) {
    if (f.load_error.empty()) {
      out.push_back(&f);
    } else {
      rec.fail(f.name + "/load", f.load_error);
    }
  }
  return out;
}

bool is_constant(const Fixture& f) { return f.gen->kind() == GeneratorKind::kConstant; }

std::vector<CheckResult> aps_identities(const std::vector<Fixture>& fixtures) {
  Recorder rec("aps-identities");
  for (const Fixture* f : usable(fixtures, rec)) {
    rec.check(f->name + "/fixture-integrity", kFixtureTol, [&] {
      return spectral_norm(time_ordered_exp(*f->gen, f->t, 1e-11).propagator - f->propagator);
    });
    rec.check(f->name + "/phase-driven", 10 * kOracleTol, [&] {
      return verify_identity(phase_factorize(*f->gen, kOracleTol / 10), f->t, kOracleTol).error;
    });
    rec.check(f->name + "/amplitude-driven", 10 * kOracleTol, [&] {
      return verify_identity(amplitude_factorize(*f->gen, kOracleTol / 10), f->t, kOracleTol).error;
    });
  }
  return rec.take();
}

std::vector<CheckResult> dyson_tail(const std::vector<Fixture>& fixtures) {
  Recorder rec("dyson-tail");
  const double e2 = std::exp(2.0);
  rec.check("scalar-shift-exactness", 1e-14, [] {
    const double lambda = 0.7, t = 2.0;
    CMatrix l(1, 1);
    l(0, 0) = lambda;
    // The shifted operand vanishes, so any order and grid give the exact value.
    SeriesPlan plan;
    plan.epsilon = 1e-6;
    plan.t = t;
    plan.shift = lambda;
    plan.tau = lambda * t;
    plan.M = 5;
    plan.N_m = 8;
    plan.h = t / 8.0;
    plan.mode = PlanMode::kBound;
    const SeriesEvaluation ev = eval_shifted_series([l](double) { return l; }, lambda, plan);
    return std::abs(ev.value(0, 0) - std::exp(-lambda * t));
  });
  for (const Fixture* f : usable(fixtures, rec)) {
    rec.check(f->name + "/phase-aps-dyson", 1e-6, [&] {
      const EvolutionReport r =
          is_constant(*f) ? approximate_expAt_phase(f->gen->coefficients().front(), f->t, 1e-6)
                          : approximate_time_dependent(*f->gen, f->t, 1e-6);
      return spectral_norm(r.approx - f->propagator);
    });
    if (!is_constant(*f)) continue;
    const CMatrix a1 = f->gen->split(0.0).dissipative;
    const double norm = spectral_norm(a1);
    if (norm == 0.0) continue;
    const CMatrix l = a1 / norm;
    for (double tau : {0.5, 1.0, 2.0, 4.0}) {
      const int first = static_cast<int>(std::ceil(e2 * tau));
      for (int M = first; M <= first + 6; M += 3) {
        rec.check(f->name + "/tail tau=" + std::to_string(tau).substr(0, 3) + " M=" + std::to_string(M),
                  chernoff_tail(tau, M) + 1e-10, [&] {
                    SeriesPlan plan;
                    plan.epsilon = 4e-12;
                    plan.t = tau;
                    plan.shift = 1.0;
                    plan.tau = tau;
                    plan.M = M;
                    plan.N_m = 64;
                    plan.h = tau / 64.0;
                    plan.mode = PlanMode::kAdaptive;
                    const SeriesEvaluation ev = eval_shifted_series([l](double) { return l; }, 1.0, plan);
                    return spectral_norm(ev.value - expm(l * -tau));
                  });
      }
    }
  }
  return rec.take();
}

std::vector<CheckResult> fast_forward(const std::vector<Fixture>& fixtures) {
  Recorder rec("ff");
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    rec.check("normalization eps=" + std::to_string(eps), eps,
              [eps] { return std::abs(1.0 - GaussianQuad::build(eps, 1.0).normalization()); });
  }
  for (const Fixture* f : usable(fixtures, rec)) {
    if (!is_constant(*f)) continue;
    const CMatrix a = f->gen->coefficients().front();
    rec.check(f->name + "/gaussian-ff", 1e-6, [&] {
      return gaussian_ff(cartesian_split(a).dissipative, f->t, 1e-6).error;
    });
    rec.check(f->name + "/amp-aps-ff", 1e-5, [&] {
      return spectral_norm(approximate_expAt_amplitude(a, f->t, 1e-5).approx - f->propagator);
    });
  }
  return rec.take();
}

std::vector<CheckResult> embeddings(const std::vector<Fixture>& fixtures) {
  Recorder rec("embeddings");
  rec.check("kernel-normalization", 1e-3,
            [] { return std::abs(1.0 - kernel_normalization(LchsKernel::cauchy(), 1e-3)); });
  for (const Fixture* f : usable(fixtures, rec)) {
    // Polynomial generators need an oracle solve per quadrature node.
    const double lchs_eps = f->gen->kind() == GeneratorKind::kPolynomial ? 1e-2 : 1e-3;
    rec.check(f->name + "/lchs", lchs_eps, [&] {
      return spectral_norm(lchs_evolve(*f->gen, f->t, lchs_eps).approx - f->propagator);
    });
    rec.check(f->name + "/ndme", 1e-6, [&] {
      return spectral_norm(ndme_evolve(*f->gen, f->t, 4096).approx - f->propagator);
    });
  }
  return rec.take();
}

}  // namespace

std::vector<CheckResult> run_suite(const std::string& suite, const std::string& fixture_dir) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  const std::vector<Fixture> fixtures = load_fixtures(fixture_dir);
  std::vector<CheckResult> all;
  auto add = [&](std::vector<CheckResult> part) {
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  };
  if (suite == "aps-identities" || suite == "all") add(aps_identities(fixtures));
  if (suite == "dyson-tail" || suite == "all") add(dyson_tail(fixtures));
  if (suite == "ff" || suite == "all") add(fast_forward(fixtures));
  if (suite == "embeddings" || suite == "all") add(embeddings(fixtures));
  return all;
}

int cmd_verify(const std::string& suite, const std::string& fixture_dir, const std::string& out,
               std::ostream& stdout_stream, std::ostream& err) {
  std::vector<CheckResult> results;
  try {
    results = run_suite(suite, fixture_dir);
  } catch (const ConfigError& e) {
    err << "apskit verify: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  Json doc;
  doc["version"] = kConfigVersion;
  doc["suite"] = suite;
  Json checks = Json::array();
  int failed = 0;
  for (const CheckResult& r : results) {
    if (!r.passed) ++failed;
    Json c;
    c["suite"] = r.suite;
    c["name"] = r.name;
    c["passed"] = r.passed;
    c["value"] = std::isfinite(r.value) ? Json(r.value) : Json(nullptr);
    c["tolerance"] = r.tolerance;
    if (!r.detail.empty()) c["detail"] = r.detail;
    checks.push_back(std::move(c));
  }
  doc["passed"] = failed == 0;
  doc["checks"] = std::move(checks);
  if (out.empty()) {
    stdout_stream << doc.dump(2) << '\n';
  } else {
    std::ofstream file(out);
    if (!file) {
      err << "apskit verify: cannot write '" << out << "'\n";
      return kExitInvalidConfig;
    }
    file << doc.dump(2) << '\n';
    for (const CheckResult& r : results) {
      if (!r.passed) stdout_stream << "FAIL " << r.name << " " << r.detail << '\n';
    }
    stdout_stream << suite << ": " << results.size() - failed << "/" << results.size()
                  << " checks passed\n";
  }
  return failed == 0 ? kExitOk : kExitMethodFailure;
}

}  // namespace apskit::cli
