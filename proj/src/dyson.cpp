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

#include "apskit/dyson.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "apskit/aps.hpp"
#include "apskit/errors.hpp"
#include "apskit/oracle.hpp"
#include "detail.hpp"

namespace apskit {

namespace {

using detail::attach_series;
using detail::check_epsilon;
using detail::check_time;
using detail::kPsdTolerance;
using detail::seconds_since;

constexpr double kHermitianTolerance = 1e-8;
constexpr int kMaxRichardsonDepth = 8;

double max_asymmetry(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Phase-rotated dissipative part in the eigenbasis of A2:
// (e^{i D s} B e^{-i D s})_{jk} = B_jk e^{i (d_j - d_k) s}.
struct RotatingFrame {
  HermitianEigen hamiltonian;
  CMatrix dissipative;  // A1 in the eigenbasis of A2

  RotatingFrame(const CartesianParts& parts)
      : hamiltonian(parts.hamiltonian),
        dissipative(hamiltonian.vectors().adjoint() * parts.dissipative * hamiltonian.vectors()) {}

  CMatrix rotated(double s, double shift) const {
    const RVector& d = hamiltonian.values();
    CMatrix out(dissipative.rows(), dissipative.cols());
    for (Eigen::Index j = 0; j < d.size(); ++j) {
      for (Eigen::Index k = 0; k < d.size(); ++k) {
        out(j, k) = dissipative(j, k) * std::polar(1.0, (d(j) - d(k)) * s);
      }
      out(j, j) -= shift;
    }
    return out;
  }

  // V e^{-i D t} S V^dagger.
  CMatrix to_lab(const CMatrix& s, double t) const {
    const RVector& d = hamiltonian.values();
    CMatrix phased = s;
    for (Eigen::Index j = 0; j < d.size(); ++j) phased.row(j) *= std::polar(1.0, -d(j) * t);
    return hamiltonian.vectors() * phased * hamiltonian.vectors().adjoint();
  }
};

SeriesCombiner shifted_combiner(double tau) {
  return [tau](const std::vector<CMatrix>& sums) {
    CMatrix total = sums.front();
    for (std::size_t k = 1; k < sums.size(); ++k) {
      if (k % 2) {
        total -= sums[k];
      } else {
        total += sums[k];
      }
    }
    return CMatrix(total * std::exp(-tau));
  };
}

}  // namespace

double poisson_tail(double tau, int M) {
  if (tau < 0.0) throw InvalidArgument("poisson_tail: tau must be nonnegative");
  if (tau == 0.0) return 0.0;
  double total = 0.0;
  for (int k = std::max(M + 1, 0);; ++k) {
    const double term = std::exp(-tau + k * std::log(tau) - std::lgamma(k + 1.0));
    total += term;
    if (k > tau && term <= total * 1e-17) break;
    if (k > M + 100000) break;
  }
  return total;
}

double chernoff_tail(double tau, int M) { return std::exp(-(tau + M)); }

int truncation_order(double tau, double epsilon) {
  check_epsilon(epsilon, "truncation_order");
  if (!(tau >= 0.0)) throw InvalidArgument("truncation_order: tau must be nonnegative");
  if (tau == 0.0) return 0;
  const double log_inv = std::log(1.0 / epsilon);
  const double e = std::numbers::e;
  if (tau >= log_inv / (e + 1.0)) {
    const double a = std::floor(e * e * tau) + 1.0;
    const double b = std::floor(log_inv) + 1.0;
    return static_cast<int>(std::max(a, b));
  }
  const double loglog = std::max(1.0, std::log(log_inv));
  return static_cast<int>(std::max(std::ceil(2.0 * tau), std::ceil(2.0 * log_inv / loglog)));
}

int order_for_tail(double tau, double target) {
  if (!(target > 0.0)) throw InvalidArgument("order_for_tail: target must be positive");
  int M = 0;
  while (poisson_tail(tau, M) > target) ++M;
  return M;
}

double grid_count_bound(int M, double L_max, double Lhat_max, double t, double epsilon) {
  if (M == 0 || t == 0.0) return 1.0;
  const double tau = t * L_max;
  return std::ceil(M * (Lhat_max * t + L_max * (tau + 1.0)) / epsilon);
}

SeriesPlan plan_series(double L_max, double Lhat_max, double t, double epsilon, PlanMode mode) {
  check_epsilon(epsilon, "plan_series");
  check_time(t, "plan_series");
  if (!(L_max >= 0.0) || !std::isfinite(L_max)) {
    throw InvalidArgument("plan_series: L_max must be finite and nonnegative");
  }
  if (!(Lhat_max >= 0.0)) throw InvalidArgument("plan_series: Lhat_max must be nonnegative");
  SeriesPlan plan;
  plan.epsilon = epsilon;
  plan.t = t;
  plan.shift = L_max;
  plan.tau = t * L_max;
  plan.M_formula = truncation_order(plan.tau, epsilon);
  plan.M = plan.M_formula;
  plan.constants["tau_factor_chosen"] = std::numbers::e * std::numbers::e;
  plan.constants["log_factor_chosen"] = 2.0;
  plan.N_m_bound = grid_count_bound(plan.M, L_max, Lhat_max, t, epsilon);
  plan.mode = mode;
  if (mode == PlanMode::kBound && !std::isfinite(plan.N_m_bound)) plan.mode = PlanMode::kAdaptive;

  if (plan.mode == PlanMode::kBound) {
    plan.N_m = static_cast<std::int64_t>(std::min(plan.N_m_bound, 9.0e18));
  } else {
    plan.M = std::max(plan.M, order_for_tail(plan.tau, epsilon / 4.0));
    plan.N_m = RefinementOptions{}.initial_grid;
  }
  if (plan.M == 0) plan.N_m = 1;
  plan.h = t / static_cast<double>(plan.N_m);
  plan.tail_bound = poisson_tail(plan.tau, plan.M);
  return plan;
}

std::vector<CMatrix> ordered_sums(Eigen::Index dim, int M, std::int64_t N, double t,
                                  const OrderedSumTerms& terms) {
  if (M < 0 || N < 1) throw InvalidArgument("ordered_sums: need M >= 0 and N >= 1");
  const double h = t / static_cast<double>(N);
  std::vector<CMatrix> w(static_cast<std::size_t>(M) + 1, CMatrix::Zero(dim, dim));
  w[0] = identity(dim);
  for (std::int64_t m = 0; m < N; ++m) {
    if (M > 0) {
      const CMatrix hx = terms.operand(m, h) * h;
      require_square(hx, "ordered_sums: operand", dim);
      // Descending k so w[k - 1] still holds the value before point m.
      for (int k = M; k >= 1; --k) w[k].noalias() += hx * w[k - 1];
    }
    if (terms.step) {
      const CMatrix v = terms.step(m, h);
      for (auto& wk : w) wk = v * wk;
    }
  }
  return w;
}

std::vector<CMatrix> ordered_sums_enumerated(Eigen::Index dim, int M, std::int64_t N, double t,
                                             const OrderedSumTerms& terms) {
  const double h = t / static_cast<double>(N);
  std::vector<CMatrix> x, v;
  for (std::int64_t m = 0; m < N; ++m) {
    x.push_back(terms.operand(m, h));
    v.push_back(terms.step ? terms.step(m, h) : identity(dim));
  }
  // Product of step factors for points lo..hi-1, later points on the left.
  auto steps = [&](std::int64_t lo, std::int64_t hi) {
    CMatrix p = identity(dim);
    for (std::int64_t m = lo; m < hi; ++m) p = v[m] * p;
    return p;
  };
  std::vector<CMatrix> sums(static_cast<std::size_t>(M) + 1, CMatrix::Zero(dim, dim));
  std::vector<std::int64_t> idx;
  auto recurse = [&](auto&& self, int k, std::int64_t next) -> void {
    if (static_cast<int>(idx.size()) == k) {
      CMatrix p = steps(0, idx.empty() ? N : idx.front());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const std::int64_t end = j + 1 < idx.size() ? idx[j + 1] : N;
        // Step m is applied right after operand m.
        p = steps(idx[j], end) * x[idx[j]] * p;
      }
      sums[k] += p * std::pow(h, k);
      return;
    }
    for (std::int64_t m = next; m < N; ++m) {
      idx.push_back(m);
      self(self, k, m + 1);
      idx.pop_back();
    }
  };
  for (int k = 0; k <= M; ++k) recurse(recurse, k, 0);
  return sums;
}

SeriesEvaluation evaluate_on_grid(Eigen::Index dim, const SeriesPlan& plan,
                                  const OrderedSumTerms& terms, const SeriesCombiner& combine,
                                  double target, double operand_norm, double prefactor,
                                  const RefinementOptions& options) {
  auto weight = [&](std::int64_t N) {
    // sum_k C(N, k) (h s)^k for k <= M.
    const double hs = plan.t / static_cast<double>(N) * operand_norm;
    double c = 1.0;
    double total = 1.0;
    for (int k = 1; k <= plan.M && k <= N; ++k) {
      c *= static_cast<double>(N - k + 1) / k * hs;
      total += c;
    }
    return prefactor * total;
  };
  auto at = [&](std::int64_t N) { return combine(ordered_sums(dim, plan.M, N, plan.t, terms)); };

  SeriesEvaluation ev;
  if (plan.mode == PlanMode::kBound || plan.M == 0 || plan.t == 0.0) {
    const std::int64_t N = plan.M == 0 || plan.t == 0.0 ? std::max<std::int64_t>(1, plan.N_m) : plan.N_m;
    if (N > options.max_grid && plan.mode == PlanMode::kBound) {
      std::ostringstream msg;
      msg << "bound-mode grid of " << N << " points exceeds the cap of " << options.max_grid;
      throw InvalidArgument(msg.str());
    }
    ev.value = at(N);
    ev.N_m = N;
    ev.coefficient_weight = weight(N);
    return ev;
  }

  if (!(target > 0.0)) throw InvalidArgument("evaluate_on_grid: target must be positive");
  std::int64_t N = std::max<std::int64_t>(1, options.initial_grid);
  std::vector<CMatrix> previous_row{at(N)};
  CMatrix best_previous = previous_row.front();
  int levels = 1;
  double change = std::numeric_limits<double>::infinity();
  while (N * 2 <= options.max_grid) {
    N *= 2;
    ++levels;
    std::vector<CMatrix> row{at(N)};
    if (options.extrapolate) {
      const int depth = std::min<int>(static_cast<int>(previous_row.size()), kMaxRichardsonDepth);
      for (int j = 1; j <= depth; ++j) {
        const double factor = std::ldexp(1.0, j) - 1.0;
        row.push_back(row[j - 1] + (row[j - 1] - previous_row[j - 1]) / factor);
      }
    }
    const CMatrix& best = row.back();
    change = spectral_norm(best - best_previous);
    if (change < target) {
      ev.value = best;
      ev.N_m = N;
      ev.levels = levels;
      ev.last_change = change;
      ev.coefficient_weight = weight(N);
      return ev;
    }
    best_previous = best;
    previous_row = std::move(row);
  }
  std::ostringstream msg;
  msg << "series grid refinement not converged: change " << change << " at " << N
      << " points (target " << target << ")";
  throw NotConvergedError(msg.str(), change);
}

SeriesEvaluation eval_shifted_series(const Sampler& L, double L_max, const SeriesPlan& plan,
                                     const RefinementOptions& options) {
  const CMatrix probe = L(0.0);
  require_square(probe, "eval_shifted_series: sample");
  const Eigen::Index dim = probe.rows();
  OrderedSumTerms terms;
  terms.operand = [&L, L_max, dim](std::int64_t m, double h) {
    const double s = static_cast<double>(m) * h;
    CMatrix x = L(s);
    require_square(x, "eval_shifted_series: sample", dim);
    const double asym = max_asymmetry(x);
    if (asym > kHermitianTolerance) {
      std::ostringstream msg;
      msg << "eval_shifted_series: sample at grid point " << m << " (t = " << s
          << ") is not Hermitian, asymmetry " << asym;
      throw NotHermitianError(msg.str(), s, asym);
    }
    x.diagonal().array() -= L_max;
    return x;
  };
  return evaluate_on_grid(dim, plan, terms, shifted_combiner(plan.t * L_max), plan.epsilon / 4.0,
                          L_max, std::exp(-plan.t * L_max), options);
}

EvolutionReport approximate_expAt_phase(const CMatrix& a, double t, double epsilon, PlanMode mode,
                                        const RefinementOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  require_square(a, "approximate_expAt_phase");
  require_finite(a, "approximate_expAt_phase");
  check_time(t, "approximate_expAt_phase");
  check_epsilon(epsilon, "approximate_expAt_phase");
  const CartesianParts parts = cartesian_split(a);
  const HermitianEigen dissipative(parts.dissipative);
  if (dissipative.min_value() < -kPsdTolerance) {
    throw NotPsdError(
        "approximate_expAt_phase: dissipative part is not positive semidefinite; use "
        "ill_posed_variant",
        dissipative.min_value());
  }
  // sup ||A_p|| is ||A1||; its rate is ||[A2, A1]||.
  const double shift = std::max(0.0, dissipative.max_value());
  const double rate = spectral_norm(commutator(parts.hamiltonian, parts.dissipative));
  const SeriesPlan plan = plan_series(shift, rate, t, epsilon, mode);

  const RotatingFrame frame(parts);
  OrderedSumTerms terms;
  terms.operand = [&frame, shift](std::int64_t m, double h) {
    return frame.rotated(static_cast<double>(m) * h, shift);
  };
  const SeriesEvaluation ev =
      evaluate_on_grid(a.rows(), plan, terms, shifted_combiner(plan.tau), epsilon / 4.0, shift,
                       std::exp(-plan.tau), options);

  EvolutionReport report;
  report.method = "phase-aps-dyson";
  report.approx = frame.to_lab(ev.value, t);
  report.reference = expm(a * (-t));
  finalize_error(report);
  report.bound = epsilon;
  attach_series(report, plan, ev);
  report.wall_seconds = seconds_since(start);
  return report;
}

EvolutionReport approximate_time_dependent(const Generator& gen, double t, double epsilon,
                                           PlanMode mode, const RefinementOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_time(t, "approximate_time_dependent");
  check_epsilon(epsilon, "approximate_time_dependent");
  if (t > gen.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument("approximate_time_dependent: t beyond the generator horizon");
  }
  const BoundAudit audit = audit_bounds(gen, 257);
  if (audit.a1_min_eigenvalue < -kPsdTolerance) {
    throw NotPsdError("approximate_time_dependent: dissipative part is not positive semidefinite",
                      audit.a1_min_eigenvalue);
  }
  const GeneratorBounds& b = gen.bounds();
  const double shift = b.a1_max;
  const double rate = b.rate_applicable ? b.a1_rate_max + 2.0 * b.a1_max * b.a2_max
                                        : std::numeric_limits<double>::infinity();
  const SeriesPlan plan = plan_series(shift, rate, t, epsilon, mode);
  const double inner_tol = epsilon / 100.0;
  const ApsFactorization fact = phase_factorize(gen, inner_tol);
  const Eigen::Index dim = gen.dim();

  // Step factors are requested for m = 0, 1, 2, ... in order; reuse U((m+1)h).
  struct StepCache {
    std::int64_t m = -2;  // no entry yet
    double h = 0.0;
    CMatrix next;
  };
  auto cache = std::make_shared<StepCache>();
  OrderedSumTerms terms;
  terms.operand = [&gen, shift](std::int64_t m, double h) {
    CMatrix x = gen.split(static_cast<double>(m) * h).dissipative;
    x.diagonal().array() -= shift;
    return x;
  };
  terms.step = [&fact, cache](std::int64_t m, double h) {
    const CMatrix here = (cache->m + 1 == m && cache->h == h)
                             ? cache->next
                             : fact.integrator(static_cast<double>(m) * h);
    CMatrix next = fact.integrator(static_cast<double>(m + 1) * h);
    CMatrix v = next * here.adjoint();
    cache->m = m;
    cache->h = h;
    cache->next = std::move(next);
    return v;
  };
  const SeriesEvaluation ev = evaluate_on_grid(dim, plan, terms, shifted_combiner(plan.tau),
                                               epsilon / 4.0, shift, std::exp(-plan.tau), options);

  EvolutionReport report;
  report.method = "phase-aps-dyson-time-dependent";
  report.approx = ev.value;
  const OracleResult reference = time_ordered_exp(gen, t, inner_tol);
  report.reference = reference.propagator;
  finalize_error(report);
  report.bound = epsilon;
  attach_series(report, plan, ev);
  report.diagnostics["oracle_defect"] = reference.defect;
  report.wall_seconds = seconds_since(start);
  return report;
}

EvolutionReport ill_posed_variant(const CMatrix& a, double t, double epsilon,
                                  const IllPosedOptions& options, PlanMode mode) {
  const auto start = std::chrono::steady_clock::now();
  require_square(a, "ill_posed_variant");
  require_finite(a, "ill_posed_variant");
  check_time(t, "ill_posed_variant");
  check_epsilon(epsilon, "ill_posed_variant");
  const CartesianParts parts = cartesian_split(a);
  const double lambda_min = min_eigenvalue(parts.dissipative);
  if (lambda_min >= -kPsdTolerance) return approximate_expAt_phase(a, t, epsilon, mode);

  const double excess = -lambda_min * t;
  if (excess > options.horizon_limit) {
    std::ostringstream msg;
    msg << "ill-posed horizon exceeded: |lambda_min| t = " << excess << " > "
        << options.horizon_limit;
    throw IllPosedHorizonError(msg.str());
  }
  const double a_max = spectral_norm(a);
  const double shift = 0.5 * (a_max + lambda_min);
  // Eigenvalues of A1 lie in [lambda_min, a_max], so ||A_p - shift|| <= spread.
  const double spread = 0.5 * (a_max - lambda_min);
  const double rate = spectral_norm(commutator(parts.hamiltonian, parts.dissipative));
  const double growth = std::exp(excess);
  SeriesPlan plan = plan_series(spread, rate, t, epsilon / growth, mode);
  plan.shift = shift;
  plan.tau = shift * t;
  plan.tail_bound = growth * poisson_tail(spread * t, plan.M);
  plan.constants["growth_factor"] = growth;

  const RotatingFrame frame(parts);
  OrderedSumTerms terms;
  terms.operand = [&frame, shift](std::int64_t m, double h) {
    return frame.rotated(static_cast<double>(m) * h, shift);
  };
  const SeriesEvaluation ev =
      evaluate_on_grid(a.rows(), plan, terms, shifted_combiner(plan.tau), epsilon / 4.0, spread,
                       std::exp(-plan.tau), RefinementOptions{});

  EvolutionReport report;
  report.method = "phase-aps-dyson-ill-posed";
  report.approx = frame.to_lab(ev.value, t);
  report.reference = expm(a * (-t));
  finalize_error(report);
  report.bound = epsilon * growth;
  attach_series(report, plan, ev);
  report.diagnostics["lambda_min"] = lambda_min;
  report.wall_seconds = seconds_since(start);
  return report;
}

CVector SourceTerm::at(double t) const {
  if (coefficients.empty()) throw InvalidArgument("SourceTerm: no coefficients");
  CVector acc = coefficients.back();
  for (std::size_t k = coefficients.size() - 1; k-- > 0;) acc = acc * t + coefficients[k];
  return acc;
}

InhomogeneousEmbedding inhomogeneous_expand(const Generator& gen, const SourceTerm& b,
                                            const CVector& u0) {
  const Eigen::Index n = gen.dim();
  if (b.coefficients.empty()) throw InvalidArgument("inhomogeneous_expand: empty source term");
  for (const auto& c : b.coefficients) {
    if (c.size() != n) throw DimensionError("inhomogeneous_expand: source dimension mismatch");
  }
  if (u0.size() != n) throw DimensionError("inhomogeneous_expand: initial state dimension mismatch");

  const double T = gen.horizon();
  double b_sup = 0.0;
  const int grid = b.coefficients.size() == 1 ? 1 : 1024;
  for (int i = 0; i <= grid; ++i) {
    b_sup = std::max(b_sup, b.at(grid ? T * i / grid : 0.0).cwiseAbs().maxCoeff());
  }
  double scale = T * b_sup;
  const bool trivial = !(scale > 0.0);
  if (trivial) scale = 1.0;

  auto block = [n, scale](const CMatrix& a, const CVector& bk) {
    CMatrix m = CMatrix::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = a;
    m.topRightCorner(n, n) = CMatrix(bk.asDiagonal()) * (-1.0 / scale);
    return m;
  };
  const CVector zero = CVector::Zero(n);
  auto expand = [&]() -> Generator {
    if (gen.kind() == GeneratorKind::kPiecewiseConstant) {
      if (b.coefficients.size() != 1) {
        throw InvalidArgument("inhomogeneous_expand: piecewise generators need a constant source");
      }
      std::vector<CMatrix> pieces;
      for (const auto& p : gen.pieces()) pieces.push_back(block(p, b.coefficients.front()));
      return Generator::piecewise(gen.breakpoints(), std::move(pieces));
    }
    const auto& c = gen.coefficients();
    const std::size_t degree = std::max(c.size(), b.coefficients.size());
    std::vector<CMatrix> coeffs;
    for (std::size_t k = 0; k < degree; ++k) {
      coeffs.push_back(block(k < c.size() ? c[k] : CMatrix::Zero(n, n),
                             k < b.coefficients.size() ? b.coefficients[k] : zero));
    }
    return degree == 1 ? Generator::constant(coeffs.front(), T)
                       : Generator::polynomial(std::move(coeffs), T);
  };
  CVector initial = CVector::Zero(2 * n);
  initial.head(n) = u0;
  initial.tail(n).setConstant(scale);
  return InhomogeneousEmbedding{expand(), std::move(initial), scale, trivial};
}

}  // namespace apskit
