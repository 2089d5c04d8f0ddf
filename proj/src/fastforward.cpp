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

#include "apskit/fastforward.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "apskit/errors.hpp"
#include "apskit/philox.hpp"
#include "detail.hpp"

namespace apskit {

namespace {

using detail::attach_series;
using detail::check_epsilon;
using detail::check_time;
using detail::kPsdTolerance;
using detail::seconds_since;

constexpr double kHermitianTolerance = 1e-10;
constexpr std::uint64_t kChunkSamples = 256;

const double kInvTwoSqrtPi = 0.5 / std::sqrt(std::numbers::pi);

HermitianEigen psd_eigen(const CMatrix& l, const char* what) {
  require_square(l, what);
  require_finite(l, what);
  if (!is_hermitian(l, kHermitianTolerance)) {
    throw InvalidArgument(std::string(what) + ": generator must be Hermitian");
  }
  HermitianEigen eig(l);
  if (l.size() > 0 && eig.min_value() < -kPsdTolerance) {
    throw NotPsdError(std::string(what) + ": matrix is not positive semidefinite",
                      eig.min_value());
  }
  return eig;
}

// Welford accumulator over matrix samples; M2 holds sum |x - mean|^2 entrywise.
struct Moments {
  std::uint64_t count = 0;
  CMatrix mean;
  Eigen::MatrixXd m2;

  void add(const CMatrix& x) {
    if (count == 0) {
      mean = CMatrix::Zero(x.rows(), x.cols());
      m2 = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    }
    ++count;
    const CMatrix delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += (delta.array() * (x - mean).array().conjugate()).real().matrix();
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    const CMatrix delta = other.mean - mean;
    mean += delta * (nb / n);
    m2 += other.m2 + (delta.cwiseAbs2() * (na * nb / n));
    count += other.count;
  }
};

}  // namespace

double gaussian_cutoff(double epsilon) {
  check_epsilon(epsilon, "gaussian_cutoff");
  return 2.0 * std::sqrt(std::log(1.0 / epsilon));
}

GaussianQuad GaussianQuad::build(double epsilon, double max_frequency) {
  GaussianQuad q;
  q.M_cut = gaussian_cutoff(epsilon);
  double spacing = 0.5;
  if (max_frequency > 0.0) spacing = std::min(spacing, std::numbers::pi / (4.0 * max_frequency));
  const int intervals = std::max(1, static_cast<int>(std::ceil(2.0 * q.M_cut / spacing)));
  const double step = 2.0 * q.M_cut / intervals;
  q.n_nodes = intervals + 1;
  q.nodes.resize(q.n_nodes);
  q.weights.assign(q.n_nodes, step);
  for (int i = 0; i < q.n_nodes; ++i) q.nodes[i] = -q.M_cut + i * step;
  q.weights.front() *= 0.5;
  q.weights.back() *= 0.5;
  return q;
}

Complex GaussianQuad::apply(double x) const {
  // The rule is symmetric, so the sine terms cancel pairwise.
  double re = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double eta = nodes[i];
    re += weights[i] * std::exp(-0.25 * eta * eta) * std::cos(eta * x);
  }
  return {re * kInvTwoSqrtPi, 0.0};
}

double GaussianQuad::normalization() const { return apply(0.0).real(); }

CMatrix gaussian_ff_apply(const HermitianEigen& l, double t, double epsilon,
                          GaussianQuad* quad_out) {
  const RVector& values = l.values();
  RVector freq(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) freq(j) = std::sqrt(std::max(values(j), 0.0) * t);
  const double max_freq = freq.size() > 0 ? freq.maxCoeff() : 0.0;
  const GaussianQuad quad = GaussianQuad::build(epsilon, max_freq);
  CVector diag(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) diag(j) = quad.apply(freq(j));
  if (quad_out) *quad_out = quad;
  return l.vectors() * diag.asDiagonal() * l.vectors().adjoint();
}

EvolutionReport gaussian_ff(const CMatrix& l, double t, double epsilon) {
  const auto start = std::chrono::steady_clock::now();
  check_time(t, "gaussian_ff");
  check_epsilon(epsilon, "gaussian_ff");
  const HermitianEigen eig = psd_eigen(l, "gaussian_ff");
  GaussianQuad quad;
  EvolutionReport report;
  report.method = "gaussian-ff";
  report.approx = gaussian_ff_apply(eig, t, epsilon, &quad);
  report.reference = expm(l * -t);
  finalize_error(report);
  report.bound = epsilon;
  report.diagnostics["M_cut"] = quad.M_cut;
  report.diagnostics["n_nodes"] = quad.n_nodes;
  report.diagnostics["normalization"] = quad.normalization();
  report.wall_seconds = seconds_since(start);
  return report;
}

double stochastic_truncation(int segments, double min_fraction, double t_l_max, double epsilon) {
  check_epsilon(epsilon, "stochastic_truncation");
  if (segments < 1 || !(min_fraction > 0.0) || t_l_max < 0.0) {
    throw InvalidArgument("stochastic_truncation: need segments >= 1, fraction > 0, t L >= 0");
  }
  const double arg = 4.0 * segments * std::sqrt(t_l_max) / (min_fraction * epsilon);
  if (arg <= 1.0) return 1.0;
  return std::max(1.0, std::sqrt(4.0 / min_fraction * std::log(arg)));
}

StochasticEstimate piecewise_stochastic_ff(const Generator& gen, double t, std::uint64_t samples,
                                           std::uint64_t seed, const StochasticOptions& options) {
  check_time(t, "piecewise_stochastic_ff");
  if (samples < 1) throw InvalidArgument("piecewise_stochastic_ff: samples must be >= 1");
  if (gen.kind() == GeneratorKind::kPolynomial) {
    throw InvalidArgument("piecewise_stochastic_ff: generator must be piecewise constant");
  }
  if (t > gen.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument("piecewise_stochastic_ff: t beyond the generator horizon");
  }

  // Segments of [0, t] with their eigendecompositions.
  struct Segment {
    double fraction;
    HermitianEigen eig;
    RVector freq;  // sqrt(t lambda)
  };
  std::vector<Segment> segments;
  double l_max = 0.0;
  // A constant generator is a single piece over its horizon.
  const std::vector<double> bp = gen.kind() == GeneratorKind::kConstant
                                     ? std::vector<double>{0.0, gen.horizon()}
                                     : gen.breakpoints();
  const std::vector<CMatrix>& pieces = gen.pieces();
  for (std::size_t j = 0; j < pieces.size() && t > 0.0; ++j) {
    const double lo = bp[j];
    const double hi = j + 1 == pieces.size() ? t : std::min(bp[j + 1], t);
    if (hi <= lo) break;
    Segment seg{(hi - lo) / t, psd_eigen(pieces[j], "piecewise_stochastic_ff"), RVector()};
    seg.freq = (seg.eig.values().cwiseMax(0.0) * t).cwiseSqrt();
    if (seg.eig.values().size() > 0) l_max = std::max(l_max, seg.eig.max_value());
    segments.push_back(std::move(seg));
    if (hi >= t) break;
  }

  StochasticEstimate est;
  est.samples = samples;
  est.seed = seed;
  est.segments = static_cast<int>(segments.size());
  double min_fraction = 1.0;
  for (const Segment& s : segments) min_fraction = std::min(min_fraction, s.fraction);
  est.truncation = segments.empty()
                       ? std::numeric_limits<double>::infinity()
                       : stochastic_truncation(est.segments, min_fraction, t * l_max, options.epsilon);

  const Eigen::Index dim = gen.dim();
  auto draw = [&](std::uint64_t n) {
    CMatrix product = identity(dim);
    for (std::size_t j = 0; j < segments.size(); ++j) {
      const Segment& s = segments[j];
      const double z = standard_normal_pair(seed, n, j / 2)[j % 2];
      double xi = z * std::sqrt(2.0 / s.fraction);
      if (std::abs(xi) >= est.truncation) xi = 0.0;
      CVector phases(dim);
      for (Eigen::Index k = 0; k < dim; ++k) phases(k) = std::polar(1.0, -xi * s.fraction * s.freq(k));
      product = s.eig.vectors() * phases.asDiagonal() * s.eig.vectors().adjoint() * product;
    }
    return product;
  };

  // Fixed chunks merged in index order keep the result independent of threads.
  const std::uint64_t chunks = (samples + kChunkSamples - 1) / kChunkSamples;
  std::vector<Moments> partial(chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      const std::uint64_t end = std::min(samples, (c + 1) * kChunkSamples);
      for (std::uint64_t n = c * kChunkSamples; n < end; ++n) partial[c].add(draw(n));
    }
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Moments total;
  for (const Moments& m : partial) total.merge(m);

  est.mean = total.mean;
  if (samples == 1) {
    est.stderr_norm = std::numeric_limits<double>::infinity();
  } else {
    const double n = static_cast<double>(samples);
    est.stderr_norm = std::sqrt(total.m2.sum() / (n * (n - 1.0)));
  }
  return est;
}

int amplitude_segments(double a2_max, double t) {
  const double segment = 0.5 * std::log(2.0);
  return std::max(1, static_cast<int>(std::ceil(a2_max * t / segment)));
}

int amplitude_truncation_order(double tau2, double epsilon) {
  check_epsilon(epsilon, "amplitude_truncation_order");
  if (tau2 <= 0.0) return 0;
  const double log_inv = std::log(1.0 / epsilon);
  const double loglog = log_inv > 1.0 ? std::log(log_inv) : 0.0;
  const int by_tau = static_cast<int>(std::ceil(2.0 * tau2));
  const int by_eps = static_cast<int>(std::ceil(2.0 * log_inv / (1.0 + loglog)));
  return std::max(by_tau, by_eps);
}

double amplitude_grid_bound(int M, double a1_max, double a2_max, double t, double epsilon) {
  const double tau2 = a2_max * t;
  return M * std::exp(tau2) * (a1_max * a2_max * t + a2_max * (tau2 + 1.0)) / epsilon;
}

EvolutionReport approximate_expAt_amplitude(const CMatrix& a, double t, double epsilon,
                                            PlanMode mode, const AmplitudeOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  require_square(a, "approximate_expAt_amplitude");
  require_finite(a, "approximate_expAt_amplitude");
  check_time(t, "approximate_expAt_amplitude");
  check_epsilon(epsilon, "approximate_expAt_amplitude");
  const CartesianParts parts = cartesian_split(a);
  const HermitianEigen dissipative(parts.dissipative);
  if (a.size() > 0 && dissipative.min_value() < -kPsdTolerance) {
    throw NotPsdError(
        "approximate_expAt_amplitude: dissipative part is not positive semidefinite",
        dissipative.min_value());
  }
  const Eigen::Index dim = a.rows();
  const double a1_max = spectral_norm(parts.dissipative);
  const double a2_max = spectral_norm(parts.hamiltonian);
  const int segments = amplitude_segments(a2_max, t);
  const double seg_t = t / segments;
  const double seg_eps = epsilon / segments;
  const double tau2 = a2_max * seg_t;

  SeriesPlan plan;
  plan.epsilon = seg_eps;
  plan.t = seg_t;
  plan.tau = tau2;
  plan.shift = 0.0;
  plan.N_t = segments;
  plan.mode = mode;
  plan.M_formula = amplitude_truncation_order(tau2, seg_eps);
  plan.M = plan.M_formula;
  // sum_{k > M} tau2^k / k! = e^{tau2} * Poisson tail.
  auto tail = [tau2](int M) { return tau2 > 0.0 ? std::exp(tau2) * poisson_tail(tau2, M) : 0.0; };
  if (mode == PlanMode::kAdaptive && plan.M > 0) {
    plan.M = std::max(plan.M, order_for_tail(tau2, seg_eps / 4.0 * std::exp(-tau2)));
  }
  plan.tail_bound = tail(plan.M);
  plan.N_m_bound = plan.M == 0 ? 1.0 : amplitude_grid_bound(plan.M, a1_max, a2_max, seg_t, seg_eps);
  plan.N_m = mode == PlanMode::kBound || plan.M == 0
                 ? std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(plan.N_m_bound)))
                 : options.refinement.initial_grid;
  plan.h = seg_t / static_cast<double>(plan.N_m);
  plan.constants["segment_length"] = 0.5 * std::log(2.0);
  plan.constants["a1_max"] = a1_max;
  plan.constants["a2_max"] = a2_max;

  // Step factor e^{-A1 h}, cached per grid.
  struct StepCache {
    double h = -1.0;
    CMatrix factor;
  };
  auto cache = std::make_shared<StepCache>();
  double step_eps = 0.0;
  OrderedSumTerms terms;
  terms.operand = [&parts](std::int64_t, double) { return parts.hamiltonian; };
  terms.step = [&, cache](std::int64_t, double h) {
    if (cache->h != h) {
      cache->h = h;
      if (options.fast_forward_steps) {
        // N steps per segment; each carries a share of the segment budget.
        const double steps = h > 0.0 ? std::max(1.0, std::round(seg_t / h)) : 1.0;
        step_eps = seg_eps / (16.0 * steps);
        cache->factor = gaussian_ff_apply(dissipative, h, step_eps);
      } else {
        cache->factor = dissipative.apply([h](double v) { return Complex(std::exp(-v * h), 0.0); });
      }
    }
    return cache->factor;
  };
  const SeriesCombiner combine = [](const std::vector<CMatrix>& sums) {
    CMatrix total = sums.front();
    Complex phase(1.0, 0.0);
    for (std::size_t k = 1; k < sums.size(); ++k) {
      phase *= Complex(0.0, -1.0);
      total += phase * sums[k];
    }
    return total;
  };
  const SeriesEvaluation ev = evaluate_on_grid(dim, plan, terms, combine, seg_eps / 4.0, a2_max,
                                               1.0, options.refinement);

  EvolutionReport report;
  report.method = "amp-aps-ff";
  report.approx = ev.value;
  for (int j = 1; j < segments; ++j) report.approx = ev.value * report.approx;
  report.reference = expm(a * -t);
  finalize_error(report);
  report.bound = epsilon;
  attach_series(report, plan, ev);
  report.diagnostics["segments"] = segments;
  report.diagnostics["segment_norm"] = spectral_norm(ev.value);
  if (options.fast_forward_steps) report.diagnostics["step_epsilon"] = step_eps;
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace apskit
