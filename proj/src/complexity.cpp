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

#include "apskit/complexity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "apskit/dyson.hpp"
#include "apskit/embeddings.hpp"
#include "apskit/errors.hpp"
#include "apskit/fastforward.hpp"
#include "detail.hpp"

namespace apskit {

namespace {

void check_estimate_inputs(double t, double epsilon, double norm_ratio,
                           std::initializer_list<double> norms, const char* what) {
  detail::check_time(t, what);
  detail::check_epsilon(epsilon, what);
  if (!(norm_ratio > 0.0) || !std::isfinite(norm_ratio)) {
    throw InvalidArgument(std::string(what) + ": norm ratio must be positive");
  }
  for (double n : norms) {
    if (!(n >= 0.0) || !std::isfinite(n)) {
      throw InvalidArgument(std::string(what) + ": norms must be finite and nonnegative");
    }
  }
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

void measure(TableRow& row, const std::function<EvolutionReport()>& run) {
  try {
    const EvolutionReport r = run();
    row.error = r.error;
    row.bound = r.bound;
    row.wall_ms = r.wall_seconds * 1e3;
  } catch (const Error& e) {
    row.note = e.what();
  }
}

std::vector<TableRow> scenario_rows(const Scenario& s, const ComplexityConstants& c) {
  validate_scenario(s);
  std::vector<TableRow> rows(3);
  rows[0].estimate = estimate_phase_aps(s.a_max, s.t, s.epsilon, s.norm_ratio, c);
  rows[1].estimate = estimate_amplitude_aps(s.a1_max, s.a2_max, s.t, s.epsilon, s.norm_ratio, c);
  rows[2].estimate = estimate_lchs_baseline(s.a_max, s.t, s.epsilon, s.norm_ratio, c);
  for (TableRow& row : rows) {
    row.scenario = s.name;
    row.t = s.t;
    row.epsilon = s.epsilon;
  }
  if (!s.generator) return rows;

  const Generator& gen = *s.generator;
  for (TableRow& row : rows) row.dim = static_cast<long>(gen.dim());
  const bool constant = gen.kind() == GeneratorKind::kConstant;
  measure(rows[0], [&]() {
    return constant ? approximate_expAt_phase(gen.sample(0.0), s.t, s.epsilon, s.mode)
                    : approximate_time_dependent(gen, s.t, s.epsilon, s.mode);
  });
  if (constant) {
    measure(rows[1], [&]() { return approximate_expAt_amplitude(gen.sample(0.0), s.t, s.epsilon, s.mode); });
  } else {
    rows[1].note = "amplitude path needs a constant generator";
  }
  measure(rows[2], [&]() { return lchs_evolve(gen, s.t, s.epsilon); });
  return rows;
}

}  // namespace

double log_over_loglog(double epsilon) {
  detail::check_epsilon(epsilon, "log_over_loglog");
  const double log_inv = std::log(1.0 / epsilon);
  return log_inv / std::max(1.0, std::log(log_inv));
}

QueryEstimate estimate_phase_aps(double a_max, double t, double epsilon, double norm_ratio,
                                 const ComplexityConstants& c) {
  check_estimate_inputs(t, epsilon, norm_ratio, {a_max}, "estimate_phase_aps");
  const double rate = 2.0 * a_max * a_max;
  const SeriesPlan plan = plan_series(a_max, rate, t, epsilon, PlanMode::kBound);
  QueryEstimate q;
  q.method = "phase-aps";
  q.M = plan.M;
  q.N_m = plan.N_m_bound;
  q.g = norm_ratio;
  q.per_run = c.phase_time * a_max * t + c.phase_eps * log_over_loglog(epsilon);
  q.queries_total = q.g * q.per_run;
  q.constants_used = {{"phase_time", c.phase_time},
                      {"phase_eps", c.phase_eps},
                      {"rate_bound_factor", 2.0}};
  return q;
}

QueryEstimate estimate_amplitude_aps(double a1_max, double a2_max, double t, double epsilon,
                                     double norm_ratio, const ComplexityConstants& c) {
  check_estimate_inputs(t, epsilon, norm_ratio, {a1_max, a2_max}, "estimate_amplitude_aps");
  QueryEstimate q;
  q.method = "amplitude-aps";
  q.N_t = amplitude_segments(a2_max, t);
  const double seg_t = t / q.N_t;
  const double seg_eps = epsilon / q.N_t;
  q.M = amplitude_truncation_order(a2_max * seg_t, seg_eps);
  q.N_m = q.M == 0 ? 1.0 : amplitude_grid_bound(q.M, a1_max, a2_max, seg_t, seg_eps);
  q.g = norm_ratio;
  q.per_run = c.amplitude_sqrt * std::sqrt(a1_max * t * std::log(1.0 / epsilon)) +
              c.amplitude_eps * a2_max * t * log_over_loglog(epsilon);
  q.queries_total = q.g * q.per_run;
  q.constants_used = {{"amplitude_sqrt", c.amplitude_sqrt},
                      {"amplitude_eps", c.amplitude_eps},
                      {"segment_length", 0.5 * std::log(2.0)}};
  return q;
}

QueryEstimate estimate_lchs_baseline(double a_max, double t, double epsilon, double norm_ratio,
                                     const ComplexityConstants& c) {
  check_estimate_inputs(t, epsilon, norm_ratio, {a_max}, "estimate_lchs_baseline");
  QueryEstimate q;
  q.method = "lchs-baseline";
  q.g = norm_ratio;
  q.per_run = c.lchs_baseline * a_max * t / epsilon;
  q.queries_total = q.g * q.per_run;
  q.constants_used = {{"lchs_baseline", c.lchs_baseline}};
  return q;
}

void validate_scenario(const Scenario& s) {
  const std::string what = "scenario '" + s.name + "'";
  check_estimate_inputs(s.t, s.epsilon, s.norm_ratio, {s.a_max, s.a1_max, s.a2_max}, what.c_str());
  if (s.generator && s.t > s.generator->horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument(what + ": t beyond the generator horizon");
  }
}

double crossover_epsilon(const Scenario& s, const ComplexityConstants& c) {
  validate_scenario(s);
  auto gap = [&](double log_eps) {
    const double eps = std::exp(log_eps);
    return estimate_amplitude_aps(s.a1_max, s.a2_max, s.t, eps, s.norm_ratio, c).queries_total -
           estimate_phase_aps(s.a_max, s.t, eps, s.norm_ratio, c).queries_total;
  };
  const double top = std::log(0.5);
  const double bottom = std::log(1e-16);
  const int samples = 400;
  double prev_x = top;
  double prev = gap(top);
  for (int i = 1; i <= samples; ++i) {
    const double x = top + (bottom - top) * i / samples;
    const double g = gap(x);
    if ((prev > 0.0) != (g > 0.0)) {
      double lo = x, hi = prev_x;  // lo below the swap, hi above
      const bool hi_positive = prev > 0.0;
      for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        if ((gap(mid) > 0.0) == hi_positive) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return std::exp(0.5 * (lo + hi));
    }
    prev_x = x;
    prev = g;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ComparisonTable compare_table(const std::vector<Scenario>& scenarios,
                              const ComplexityConstants& c, unsigned threads) {
  for (const Scenario& s : scenarios) validate_scenario(s);
  std::vector<std::vector<TableRow>> per_scenario(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      per_scenario[i] = scenario_rows(scenarios[i], c);
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), scenarios.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ComparisonTable table;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (TableRow& row : per_scenario[i]) table.rows.push_back(std::move(row));
    table.crossover_epsilon[scenarios[i].name] = crossover_epsilon(scenarios[i], c);
  }
  return table;
}

std::string table_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "scenario,method,dim,t,eps,M,N_m,g,queries,error,bound,wall_ms,note\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const TableRow& r : table.rows) {
    out << csv_field(r.scenario) << ',' << r.estimate.method << ',' << r.dim << ','
        << format_number(r.t) << ',' << format_number(r.epsilon) << ',' << r.estimate.M << ','
        << format_number(r.estimate.N_m) << ',' << format_number(r.estimate.g) << ','
        << format_number(r.estimate.queries_total) << ',' << opt(r.error) << ',' << opt(r.bound)
        << ',' << opt(r.wall_ms) << ',' << csv_field(r.note) << '\n';
  }
  return out.str();
}

}  // namespace apskit
