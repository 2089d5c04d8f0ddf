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


#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "apskit/cli.hpp"
#include "apskit/dyson.hpp"
#include "apskit/embeddings.hpp"
#include "apskit/errors.hpp"
#include "apskit/fastforward.hpp"
#include "apskit/oracle.hpp"

namespace apskit::cli {

namespace {

double number_at(const Json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!doc[key].is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return doc[key].get<double>();
}

template <typename T>
T unsigned_at(const Json& doc, const char* key, T fallback, const std::string& where) {
  if (!doc.contains(key)) return fallback;
  const Json& v = doc[key];
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + ": '" + key + "' must be a nonnegative integer");
  }
  return doc[key].get<T>();
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::string base_dir_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

EvolutionReport oracle_report(const Generator& gen, double t, double epsilon) {
  const auto start = std::chrono::steady_clock::now();
  const OracleResult r = time_ordered_exp(gen, t, epsilon);
  EvolutionReport report;
  report.method = "oracle";
  report.approx = r.propagator;
  report.reference = r.propagator;
  report.error = 0.0;
  report.diagnostics["oracle_defect"] = r.defect;
  report.diagnostics["steps"] = static_cast<double>(r.steps);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

const CMatrix& constant_matrix(const Generator& gen, const std::string& method) {
  if (gen.kind() != GeneratorKind::kConstant) {
    throw InvalidArgument(method + " needs a constant generator");
  }
  return gen.coefficients().front();
}

}  // namespace

CMatrix matrix_from_json(const Json& doc, const std::string& where) {
  if (!doc.is_array() || doc.empty()) throw ConfigError(where + ": matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  CMatrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw ConfigError(where + ": matrix must be square");
    }
    for (Eigen::Index j = 0; j < rows; ++j) {
      const Json& e = row[static_cast<std::size_t>(j)];
      if (e.is_number()) {
        m(i, j) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError(where + ": entries must be numbers or [re, im] pairs");
      }
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
        throw ConfigError(where + ": entries must be finite");
      }
    }
  }
  return m;
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Generator generator_from_json(const Json& doc) {
  const std::string where = "generator";
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw ConfigError(where + ": missing string 'kind'");
  }
  const std::string kind = doc["kind"].get<std::string>();
  try {
    if (kind == "constant") {
      if (!doc.contains("matrix")) throw ConfigError(where + ": missing 'matrix'");
      return Generator::constant(matrix_from_json(doc["matrix"], where + ".matrix"),
                                 number_at(doc, "horizon", where));
    }
    if (kind == "polynomial") {
      if (!doc.contains("coefficients") || !doc["coefficients"].is_array()) {
        throw ConfigError(where + ": missing array 'coefficients'");
      }
      std::vector<CMatrix> coeffs;
      for (const Json& c : doc["coefficients"]) coeffs.push_back(matrix_from_json(c, where + ".coefficients"));
      return Generator::polynomial(std::move(coeffs), number_at(doc, "horizon", where));
    }
    if (kind == "piecewise") {
      if (!doc.contains("pieces") || !doc["pieces"].is_array() || !doc.contains("breakpoints") ||
          !doc["breakpoints"].is_array()) {
        throw ConfigError(where + ": piecewise needs arrays 'breakpoints' and 'pieces'");
      }
      std::vector<CMatrix> pieces;
      for (const Json& p : doc["pieces"]) pieces.push_back(matrix_from_json(p, where + ".pieces"));
      std::vector<double> breaks;
      for (const Json& b : doc["breakpoints"]) {
        if (!b.is_number()) throw ConfigError(where + ": breakpoints must be numbers");
        breaks.push_back(b.get<double>());
      }
      return Generator::piecewise(std::move(breaks), std::move(pieces));
    }
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

Json generator_to_json(const Generator& gen) {
  Json doc;
  doc["kind"] = gen.kind() == GeneratorKind::kConstant      ? "constant"
                : gen.kind() == GeneratorKind::kPolynomial  ? "polynomial"
                                                            : "piecewise";
  if (gen.kind() == GeneratorKind::kConstant) {
    doc["horizon"] = gen.horizon();
    doc["matrix"] = matrix_to_json(gen.coefficients().front());
  } else if (gen.kind() == GeneratorKind::kPolynomial) {
    doc["horizon"] = gen.horizon();
    Json coeffs = Json::array();
    for (const CMatrix& c : gen.coefficients()) coeffs.push_back(matrix_to_json(c));
    doc["coefficients"] = std::move(coeffs);
  } else {
    doc["breakpoints"] = gen.breakpoints();
    Json pieces = Json::array();
    for (const CMatrix& p : gen.pieces()) pieces.push_back(matrix_to_json(p));
    doc["pieces"] = std::move(pieces);
  }
  return doc;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json run_config_to_json(const RunConfig& c) {
  Json doc;
  doc["version"] = kConfigVersion;
  if (c.generator_inline) {
    doc["generator"] = *c.generator_inline;
  } else {
    doc["generator"] = c.generator_path;
  }
  doc["method"] = c.method;
  doc["t"] = c.t;
  doc["epsilon"] = c.epsilon;
  doc["mode"] = to_string(c.mode);
  doc["seed"] = c.seed;
  doc["samples"] = c.samples;
  doc["steps"] = c.steps;
  doc["out"] = c.out;
  doc["format"] = c.format;
  return doc;
}

RunConfig run_config_from_json(const Json& doc) {
  const std::string where = "config";
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  if (doc.contains("version") && doc["version"] != kConfigVersion) {
    throw ConfigError(where + ": unsupported version");
  }
  RunConfig c;
  if (!doc.contains("generator")) throw ConfigError(where + ": missing 'generator'");
  if (doc["generator"].is_string()) {
    c.generator_path = doc["generator"].get<std::string>();
  } else if (doc["generator"].is_object()) {
    c.generator_inline = doc["generator"];
  } else {
    throw ConfigError(where + ": 'generator' must be a path or an object");
  }
  auto text = [&](const char* key, std::string& field) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
    field = doc[key].get<std::string>();
  };
  text("method", c.method);
  text("out", c.out);
  text("format", c.format);
  if (doc.contains("t")) c.t = number_at(doc, "t", where);
  if (doc.contains("epsilon")) c.epsilon = number_at(doc, "epsilon", where);
  if (doc.contains("mode")) {
    std::string mode;
    text("mode", mode);
    if (mode != "bound" && mode != "adaptive") throw ConfigError(where + ": mode must be bound or adaptive");
    c.mode = mode == "bound" ? PlanMode::kBound : PlanMode::kAdaptive;
  }
  c.seed = unsigned_at<std::uint64_t>(doc, "seed", c.seed, where);
  c.samples = unsigned_at<std::uint64_t>(doc, "samples", c.samples, where);
  c.steps = unsigned_at<std::int64_t>(doc, "steps", c.steps, where);
  return c;
}

void validate(const RunConfig& c) {
  if (c.generator_path.empty() == !c.generator_inline) {
    throw ConfigError("config: give exactly one of a generator path or an inline generator");
  }
  if (std::find(method_names().begin(), method_names().end(), c.method) == method_names().end()) {
    throw ConfigError("config: unknown method '" + c.method + "'");
  }
  if (!(c.t >= 0.0) || !std::isfinite(c.t)) throw ConfigError("config: t must be finite and >= 0");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("config: eps must lie in (0, 1)");
  if (c.format != "json" && c.format != "csv") throw ConfigError("config: format must be json or csv");
  if (c.method == "stochastic-ff" && c.samples == 0) throw ConfigError("config: samples must be positive");
  if (c.method == "ndme" && c.steps <= 0) throw ConfigError("config: steps must be positive");
}

Generator load_generator(const RunConfig& c) {
  const Generator gen = generator_from_json(c.generator_inline ? *c.generator_inline
                                                               : read_json_file(c.generator_path));
  if (c.t > gen.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw ConfigError("config: t exceeds the generator horizon");
  }
  return gen;
}

Json report_to_json(const EvolutionReport& r, const RunConfig& c, Eigen::Index dim) {
  Json doc;
  doc["version"] = kConfigVersion;
  doc["method"] = c.method;
  doc["dim"] = dim;
  doc["t"] = c.t;
  doc["epsilon"] = c.epsilon;
  doc["mode"] = to_string(c.mode);
  doc["seed"] = c.seed;
  doc["error"] = r.error;
  doc["bound"] = r.bound ? Json(*r.bound) : Json(nullptr);
  doc["within_bound"] = r.within_bound();
  if (r.plan) {
    const SeriesPlan& p = *r.plan;
    Json plan;
    plan["mode"] = to_string(p.mode);
    plan["epsilon"] = p.epsilon;
    plan["t"] = p.t;
    plan["tau"] = p.tau;
    plan["shift"] = p.shift;
    plan["M"] = p.M;
    plan["M_formula"] = p.M_formula;
    plan["N_m"] = p.N_m;
    plan["N_m_bound"] = std::isfinite(p.N_m_bound) ? Json(p.N_m_bound) : Json(nullptr);
    plan["h"] = p.h;
    plan["N_t"] = p.N_t;
    plan["tail_bound"] = p.tail_bound;
    plan["constants"] = p.constants;
    doc["plan"] = std::move(plan);
  } else {
    doc["plan"] = nullptr;
  }
  Json diag = Json::object();
  for (const auto& [key, value] : r.diagnostics) {
    diag[key] = std::isfinite(value) ? Json(value) : Json(nullptr);
  }
  doc["diagnostics"] = std::move(diag);
  doc["approx"] = matrix_to_json(r.approx);
  doc["reference"] = matrix_to_json(r.reference);
  return doc;
}

std::string summary_csv_line(const EvolutionReport& r, const RunConfig& c, Eigen::Index dim,
                             double norm_ratio) {
  std::ostringstream line;
  line << c.method << ',' << dim << ',' << format_number(c.t) << ',' << format_number(c.epsilon)
       << ',' << (r.plan ? std::to_string(r.plan->M) : "") << ','
       << (r.plan ? std::to_string(r.plan->N_m) : "") << ',' << format_number(norm_ratio) << ','
       << format_number(r.error) << ',' << (r.bound ? format_number(*r.bound) : "") << ','
       << format_number(r.wall_seconds * 1e3);
  return line.str();
}

unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("APSKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = std::min(cap, static_cast<unsigned>(v));
  }
  return cap;
}

EvolutionReport run_method(const Generator& gen, const RunConfig& c, unsigned threads) {
  const bool constant = gen.kind() == GeneratorKind::kConstant;
  if (c.method == "oracle") return oracle_report(gen, c.t, c.epsilon);
  if (c.method == "phase-aps-dyson") {
    return constant ? approximate_expAt_phase(gen.coefficients().front(), c.t, c.epsilon, c.mode)
                    : approximate_time_dependent(gen, c.t, c.epsilon, c.mode);
  }
  if (c.method == "amp-aps-ff") {
    return approximate_expAt_amplitude(constant_matrix(gen, c.method), c.t, c.epsilon, c.mode);
  }
  if (c.method == "lchs") return lchs_evolve(gen, c.t, c.epsilon);
  if (c.method == "ndme") return ndme_evolve(gen, c.t, c.steps);
  if (c.method == "gaussian-ff") return gaussian_ff(constant_matrix(gen, c.method), c.t, c.epsilon);
  if (c.method == "stochastic-ff") {
    const auto start = std::chrono::steady_clock::now();
    StochasticOptions options;
    options.epsilon = c.epsilon;
    options.threads = threads;
    const StochasticEstimate est = piecewise_stochastic_ff(gen, c.t, c.samples, c.seed, options);
    EvolutionReport report;
    report.method = "stochastic-ff";
    report.approx = est.mean;
    report.reference = time_ordered_exp(gen, c.t, std::min(1e-9, c.epsilon / 100.0)).propagator;
    finalize_error(report);
    // Truncation and quadrature budget plus five standard errors of sampling noise.
    report.bound = c.epsilon + 5.0 * est.stderr_norm;
    report.diagnostics["stderr"] = est.stderr_norm;
    report.diagnostics["samples"] = static_cast<double>(est.samples);
    report.diagnostics["truncation"] = est.truncation;
    report.diagnostics["segments"] = est.segments;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }
  throw ConfigError("config: unknown method '" + c.method + "'");
}

int cmd_evolve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<Generator> loaded;
  try {
    validate(c);
    loaded = load_generator(c);
  } catch (const ConfigError& e) {
    err << "apskit evolve: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  const Generator& gen = *loaded;
  EvolutionReport report;
  try {
    report = run_method(gen, c, thread_cap());
  } catch (const Error& e) {
    err << "apskit evolve: " << c.method << " failed: " << e.what() << '\n';
    return kExitMethodFailure;
  }
  const double norm_ratio = 1.0;
  const std::string machine =
      c.format == "json" ? report_to_json(report, c, gen.dim()).dump(2) + "\n"
                         : std::string(kSummaryHeader) + "\n" +
                               summary_csv_line(report, c, gen.dim(), norm_ratio) + "\n";
  if (c.out.empty()) {
    out << machine;
  } else {
    std::ofstream file(c.out);
    std::ofstream meta(c.out + ".meta.json");
    if (!file || !meta) {
      err << "apskit evolve: cannot write '" << c.out << "'\n";
      return kExitInvalidConfig;
    }
    file << machine;
    Json sidecar;
    sidecar["wall_ms"] = report.wall_seconds * 1e3;
    sidecar["threads"] = thread_cap();
    sidecar["summary"] = summary_csv_line(report, c, gen.dim(), norm_ratio);
    meta << sidecar.dump(2) << '\n';
    out << c.method << ": dim " << gen.dim() << ", t " << format_number(c.t) << ", error "
        << format_number(report.error);
    if (report.bound) out << " (bound " << format_number(*report.bound) << ")";
    out << ", " << format_number(report.wall_seconds * 1e3) << " ms\n";
  }
  if (!report.within_bound()) {
    err << "apskit evolve: error " << report.error << " exceeds the bound " << *report.bound << '\n';
    return kExitMethodFailure;
  }
  return kExitOk;
}

ScenarioFile scenarios_from_json(const Json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("scenarios: expected an object");
  if (doc.contains("version") && doc["version"] != kConfigVersion) {
    throw ConfigError("scenarios: unsupported version");
  }
  ScenarioFile file;
  if (doc.contains("constants")) {
    const Json& c = doc["constants"];
    if (!c.is_object()) throw ConfigError("scenarios: 'constants' must be an object");
    auto set = [&](const char* key, double& field) {
      if (c.contains(key)) field = number_at(c, key, "scenarios.constants");
    };
    set("phase_time", file.constants.phase_time);
    set("phase_eps", file.constants.phase_eps);
    set("amplitude_sqrt", file.constants.amplitude_sqrt);
    set("amplitude_eps", file.constants.amplitude_eps);
    set("lchs_baseline", file.constants.lchs_baseline);
  }
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw ConfigError("scenarios: missing array 'scenarios'");
  }
  for (const Json& item : doc["scenarios"]) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
      throw ConfigError("scenarios: each entry needs a string 'name'");
    }
    Scenario s;
    s.name = item["name"].get<std::string>();
    const std::string where = "scenario '" + s.name + "'";
    s.t = number_at(item, "t", where);
    s.epsilon = number_at(item, "epsilon", where);
    if (item.contains("mode")) {
      const Json& m = item["mode"];
      if (m != "bound" && m != "adaptive") throw ConfigError(where + ": mode must be bound or adaptive");
      s.mode = m == "bound" ? PlanMode::kBound : PlanMode::kAdaptive;
    }
    if (item.contains("generator")) {
      const Json& g = item["generator"];
      if (g.is_string()) {
        const std::string path = g.get<std::string>();
        s.generator = generator_from_json(read_json_file(path.front() == '/' ? path : base_dir + "/" + path));
      } else {
        s.generator = generator_from_json(g);
      }
      const GeneratorBounds& b = s.generator->bounds();
      s.a_max = b.a_max;
      s.a1_max = b.a1_max;
      s.a2_max = b.a2_max;
    }
    if (item.contains("a_max")) s.a_max = number_at(item, "a_max", where);
    if (item.contains("a1_max")) s.a1_max = number_at(item, "a1_max", where);
    if (item.contains("a2_max")) s.a2_max = number_at(item, "a2_max", where);
    if (!s.generator && !(item.contains("a_max") && item.contains("a1_max") && item.contains("a2_max"))) {
      throw ConfigError(where + ": give a_max, a1_max and a2_max or a generator");
    }
    if (item.contains("norm_ratio")) {
      s.norm_ratio = number_at(item, "norm_ratio", where);
    } else if (item.contains("u0") && s.generator) {
      // ||u0|| / ||u(t)|| from the oracle.
      const Json& u = item["u0"];
      if (!u.is_array() || static_cast<Eigen::Index>(u.size()) != s.generator->dim()) {
        throw ConfigError(where + ": u0 must have one entry per generator row");
      }
      Json as_row = Json::array();
      for (std::size_t k = 0; k < u.size(); ++k) {
        Json row = Json::array();
        for (std::size_t j = 0; j < u.size(); ++j) row.push_back(j == 0 ? u[k] : Json(0.0));
        as_row.push_back(std::move(row));
      }
      const CVector u0 = matrix_from_json(as_row, where + ".u0").col(0);
      const double final_norm =
          (time_ordered_exp(*s.generator, s.t, 1e-10).propagator * u0).norm();
      if (!(u0.norm() > 0.0) || !(final_norm > 0.0)) {
        throw ConfigError(where + ": u0 and u(t) must be nonzero");
      }
      s.norm_ratio = u0.norm() / final_norm;
    }
    try {
      validate_scenario(s);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    file.scenarios.push_back(std::move(s));
  }
  return file;
}

int cmd_table(const std::string& scenario_path, const std::string& out, std::ostream& stdout_stream,
              std::ostream& err) {
  ScenarioFile file;
  try {
    file = scenarios_from_json(read_json_file(scenario_path), base_dir_of(scenario_path));
  } catch (const ConfigError& e) {
    err << "apskit table: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  ComparisonTable table;
  try {
    table = compare_table(file.scenarios, file.constants, thread_cap());
  } catch (const Error& e) {
    err << "apskit table: " << e.what() << '\n';
    return kExitMethodFailure;
  }
  const std::string csv = table_csv(table);
  if (out.empty()) {
    stdout_stream << csv;
  } else {
    std::ofstream file_out(out);
    if (!file_out) {
      err << "apskit table: cannot write '" << out << "'\n";
      return kExitInvalidConfig;
    }
    file_out << csv;
    stdout_stream << table.rows.size() << " rows over " << file.scenarios.size() << " scenarios\n";
    for (const auto& [name, eps] : table.crossover_epsilon) {
      stdout_stream << "  " << name << ": estimates swap order at eps "
                    << (std::isnan(eps) ? std::string("(none)") : format_number(eps)) << '\n';
    }
  }
  int failures = 0;
  for (const TableRow& row : table.rows) {
    if (row.error && row.bound && *row.error > *row.bound) ++failures;
  }
  return failures == 0 ? kExitOk : kExitMethodFailure;
}

}  // namespace apskit::cli
