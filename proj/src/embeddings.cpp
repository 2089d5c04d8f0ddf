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

#include "apskit/embeddings.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "apskit/errors.hpp"
#include "apskit/oracle.hpp"
#include "apskit/propagator.hpp"
#include "detail.hpp"

namespace apskit {

namespace {

using detail::check_epsilon;
using detail::check_time;
using detail::kPsdTolerance;
using detail::seconds_since;

constexpr double kDensityHermitianTolerance = 1e-10;

void check_psd_on_audit(const Generator& gen, const char* what) {
  const BoundAudit audit = audit_bounds(gen, 257);
  if (audit.a1_min_eigenvalue < -kPsdTolerance) {
    throw NotPsdError(std::string(what) + ": dissipative part is not positive semidefinite",
                      audit.a1_min_eigenvalue);
  }
}

void check_horizon(const Generator& gen, double t, const char* what) {
  if (t > gen.horizon() * (1.0 + 1e-12) + 1e-12) {
    throw InvalidArgument(std::string(what) + ": t beyond the generator horizon");
  }
}

// Constant pieces of [0, t] as (length, Cartesian parts).
std::vector<std::pair<double, CartesianParts>> constant_segments(const Generator& gen, double t) {
  std::vector<std::pair<double, CartesianParts>> out;
  if (gen.kind() == GeneratorKind::kConstant) {
    out.emplace_back(t, gen.split(0.0));
    return out;
  }
  const std::vector<double>& bp = gen.breakpoints();
  for (std::size_t j = 0; j + 1 < bp.size() && bp[j] < t; ++j) {
    const double hi = j + 2 == bp.size() ? t : std::min(bp[j + 1], t);
    out.emplace_back(hi - bp[j], cartesian_split(gen.pieces()[j]));
  }
  return out;
}

// Right-hand side coefficients sampled at one time.
struct LindbladCoefficients {
  CMatrix hamiltonian;  // empty when absent
  std::vector<CMatrix> jumps;
  std::vector<CMatrix> jump_products;  // F^dagger F
};

LindbladCoefficients sample_coefficients(const Sampler& hamiltonian,
                                         const std::vector<Sampler>& jumps, double s) {
  LindbladCoefficients c;
  if (hamiltonian) c.hamiltonian = hamiltonian(s);
  for (const Sampler& f : jumps) {
    c.jumps.push_back(f(s));
    c.jump_products.push_back(c.jumps.back().adjoint() * c.jumps.back());
  }
  return c;
}

CMatrix lindblad_rhs(const LindbladCoefficients& c, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  if (c.hamiltonian.size() > 0) out += Complex(0.0, -1.0) * (c.hamiltonian * rho - rho * c.hamiltonian);
  for (std::size_t i = 0; i < c.jumps.size(); ++i) {
    out += c.jumps[i] * rho * c.jumps[i].adjoint();
    out -= 0.5 * (c.jump_products[i] * rho + rho * c.jump_products[i]);
  }
  return out;
}

void check_density(const DensityState& state, const char* what) {
  require_square(state.rho, what);
  require_finite(state.rho, what);
  if (!is_hermitian(state.rho, kDensityHermitianTolerance)) {
    throw InvalidArgument(std::string(what) + ": density matrix must be Hermitian");
  }
}

DensityState rk4_evolve(const Sampler& hamiltonian, const std::vector<Sampler>& jumps,
                        const DensityState& rho0, double t, std::int64_t steps,
                        const LindbladOptions& options, std::vector<CMatrix>* trajectory) {
  check_density(rho0, "lindblad_evolve");
  check_time(t, "lindblad_evolve");
  if (steps < 1) throw InvalidArgument("lindblad_evolve: steps must be >= 1");
  const double h = t / static_cast<double>(steps);
  const Complex trace0 = rho0.rho.trace();
  CMatrix rho = rho0.rho;
  if (trajectory) trajectory->push_back(rho);
  LindbladCoefficients start = sample_coefficients(hamiltonian, jumps, 0.0);
  for (std::int64_t n = 0; n < steps; ++n) {
    const double s = h * static_cast<double>(n);
    const LindbladCoefficients mid = sample_coefficients(hamiltonian, jumps, s + 0.5 * h);
    LindbladCoefficients end = sample_coefficients(hamiltonian, jumps, s + h);
    const CMatrix k1 = lindblad_rhs(start, rho);
    const CMatrix k2 = lindblad_rhs(mid, rho + 0.5 * h * k1);
    const CMatrix k3 = lindblad_rhs(mid, rho + 0.5 * h * k2);
    const CMatrix k4 = lindblad_rhs(end, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double drift = std::abs(rho.trace() - trace0);
    if (drift > options.trace_tolerance) {
      std::ostringstream msg;
      msg << "lindblad_evolve: trace drift " << drift << " exceeds " << options.trace_tolerance
          << " at step " << n + 1 << " of " << steps << "; use more steps";
      throw TraceDriftError(msg.str(), drift);
    }
    if (trajectory) trajectory->push_back(rho);
    start = std::move(end);
  }
  return {rho};
}

}  // namespace

LchsKernel LchsKernel::cauchy() {
  LchsKernel k;
  k.name = "cauchy";
  k.gamma = [](double eta) { return 1.0 / (std::numbers::pi * (1.0 + eta * eta)); };
  k.tail_mass = [](double M) {
    if (M <= 0.0) return 1.0;
    return 2.0 / std::numbers::pi * std::atan(1.0 / M);
  };
  return k;
}

double kernel_cutoff(const LchsKernel& kernel, double target) {
  if (!(target > 0.0)) throw InvalidArgument("kernel_cutoff: target must be positive");
  if (kernel.tail_mass(0.0) <= target) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (kernel.tail_mass(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NotConvergedError("kernel_cutoff: tail does not decay", target);
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (kernel.tail_mass(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

KernelQuadrature integrate_kernel(const LchsKernel& kernel, double M_cut, double frequency,
                                  double target, const std::function<CMatrix(double)>& f,
                                  std::int64_t max_nodes) {
  if (!(target > 0.0)) throw InvalidArgument("integrate_kernel: target must be positive");
  KernelQuadrature q;
  q.M_cut = M_cut;
  auto g = [&](double eta) { return CMatrix(f(eta) * kernel.gamma(eta)); };
  if (M_cut <= 0.0) {
    q.value = g(0.0) * 0.0;
    return q;
  }
  double step = 0.5;
  if (frequency > 0.0) step = std::min(step, std::numbers::pi / (4.0 * frequency));
  std::int64_t intervals = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(2.0 * M_cut / step)));
  if (intervals + 1 > max_nodes) {
    throw NotConvergedError("integrate_kernel: initial rule exceeds the node cap", INFINITY);
  }
  step = 2.0 * M_cut / static_cast<double>(intervals);
  CMatrix sum = 0.5 * (g(-M_cut) + g(M_cut));
  for (std::int64_t i = 1; i < intervals; ++i) sum += g(-M_cut + step * static_cast<double>(i));
  CMatrix value = sum * step;
  std::int64_t nodes = intervals + 1;
  double change = INFINITY;
  while (true) {
    if (nodes + intervals > max_nodes) {
      std::ostringstream msg;
      msg << "integrate_kernel: no convergence within " << max_nodes << " nodes";
      throw NotConvergedError(msg.str(), change);
    }
    CMatrix mids = CMatrix::Zero(value.rows(), value.cols());
    for (std::int64_t i = 0; i < intervals; ++i) {
      mids += g(-M_cut + step * (static_cast<double>(i) + 0.5));
    }
    const CMatrix refined = 0.5 * value + 0.5 * step * mids;
    change = spectral_norm(refined - value);
    value = refined;
    nodes += intervals;
    intervals *= 2;
    step *= 0.5;
    if (change < target) break;
  }
  q.value = value;
  q.step = step;
  q.nodes = nodes;
  q.last_change = change;
  return q;
}

// Scalar integrands are cheap, so the checks below allow more nodes than the
// matrix-valued default; the Cauchy cutoff grows as 1/eps.
constexpr std::int64_t kScalarNodeCap = std::int64_t{1} << 25;

double kernel_normalization(const LchsKernel& kernel, double epsilon) {
  check_epsilon(epsilon, "kernel_normalization");
  const double M = kernel_cutoff(kernel, epsilon / 2.0);
  const KernelQuadrature q = integrate_kernel(
      kernel, M, 0.0, epsilon / 4.0, [](double) { return CMatrix(identity(1)); }, kScalarNodeCap);
  return q.value(0, 0).real();
}

double kernel_validation_error(const LchsKernel& kernel, double epsilon) {
  check_epsilon(epsilon, "kernel_validation_error");
  const double M = kernel_cutoff(kernel, epsilon / 2.0);
  double worst = 0.0;
  for (double x : {0.0, 1.0, 2.0}) {
    const KernelQuadrature q = integrate_kernel(
        kernel, M, x, epsilon / 4.0,
        [x](double eta) { return CMatrix(CMatrix::Constant(1, 1, std::polar(1.0, -eta * x))); },
        kScalarNodeCap);
    worst = std::max(worst, std::abs(q.value(0, 0) - std::exp(-x)));
  }
  return worst;
}

EvolutionReport lchs_evolve(const Generator& gen, double t, double epsilon,
                            const LchsOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_time(t, "lchs_evolve");
  check_epsilon(epsilon, "lchs_evolve");
  check_horizon(gen, t, "lchs_evolve");
  check_psd_on_audit(gen, "lchs_evolve");
  const double validation = kernel_validation_error(options.kernel, epsilon);
  if (validation > epsilon) {
    std::ostringstream msg;
    msg << "lchs_evolve: kernel '" << options.kernel.name << "' misses e^{-x} by " << validation;
    throw InvalidArgument(msg.str());
  }

  std::function<CMatrix(double)> unitary;
  if (gen.kind() == GeneratorKind::kPolynomial) {
    OracleOptions inner;
    inner.tol = epsilon / 8.0;
    unitary = [&gen, t, inner](double eta) {
      const Sampler g = [&gen, eta](double s) {
        const CartesianParts p = gen.split(s);
        return CMatrix(Complex(0.0, 1.0) * (eta * p.dissipative + p.hamiltonian));
      };
      return time_ordered_exp(g, 0.0, t, inner).propagator;
    };
  } else {
    const auto segments = constant_segments(gen, t);
    const Eigen::Index dim = gen.dim();
    unitary = [segments, dim](double eta) {
      CMatrix u = identity(dim);
      for (const auto& [length, parts] : segments) {
        const HermitianEigen eig(eta * parts.dissipative + parts.hamiltonian);
        const double len = length;
        u = eig.apply([len](double v) { return std::polar(1.0, -v * len); }) * u;
      }
      return u;
    };
  }

  const double M = kernel_cutoff(options.kernel, epsilon / 2.0);
  const double frequency = gen.bounds().a1_max * t;
  const KernelQuadrature q =
      integrate_kernel(options.kernel, M, frequency, epsilon / 4.0, unitary, options.max_nodes);

  EvolutionReport report;
  report.method = "lchs";
  report.approx = q.value;
  report.reference = time_ordered_exp(gen, t, std::min(1e-9, epsilon / 100.0)).propagator;
  finalize_error(report);
  report.bound = epsilon;
  report.diagnostics["M_cut"] = M;
  report.diagnostics["tail_mass"] = options.kernel.tail_mass(M);
  report.diagnostics["nodes"] = static_cast<double>(q.nodes);
  report.diagnostics["step"] = q.step;
  report.diagnostics["quadrature_change"] = q.last_change;
  report.diagnostics["kernel_validation"] = validation;
  report.wall_seconds = seconds_since(start);
  return report;
}

std::vector<TruncationPoint> lchs_truncation_probe(const std::vector<double>& epsilons,
                                                   const LchsKernel& kernel) {
  std::vector<TruncationPoint> out;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double eps = epsilons[i];
    if (!(eps > 0.0) || eps > 1.0) {
      throw InvalidArgument("lchs_truncation_probe: epsilon must lie in (0, 1]");
    }
    if (i > 0 && !(eps < epsilons[i - 1])) {
      throw InvalidArgument("lchs_truncation_probe: epsilons must be strictly descending");
    }
    out.push_back({eps, kernel_cutoff(kernel, eps)});
  }
  return out;
}

NdmeEmbedding ndme_embed(const Generator& gen) {
  check_psd_on_audit(gen, "ndme_embed");
  const Eigen::Index n = gen.dim();
  NdmeEmbedding e;
  e.dim = n + 1;
  e.hamiltonian = [gen, n](double s) {
    CMatrix h = CMatrix::Zero(n + 1, n + 1);
    h.topLeftCorner(n, n) = gen.split(s).hamiltonian;
    return h;
  };
  e.jump = [gen, n](double s) {
    CMatrix f = CMatrix::Zero(n + 1, n + 1);
    f.topLeftCorner(n, n) = hermitian_sqrt(2.0 * gen.split(s).dissipative, 2.0 * kPsdTolerance);
    return f;
  };
  return e;
}

DensityState ndme_initial_state(const CVector& u0) {
  return ndme_initial_state(u0, u0 * u0.adjoint());
}

DensityState ndme_initial_state(const CVector& u0, const CMatrix& top_left) {
  const Eigen::Index n = u0.size();
  require_square(top_left, "ndme_initial_state", n);
  CMatrix rho(n + 1, n + 1);
  rho.topLeftCorner(n, n) = top_left;
  rho.topRightCorner(n, 1) = u0;
  rho.bottomLeftCorner(1, n) = u0.adjoint();
  rho(n, n) = 1.0;
  return {rho};
}

CVector ndme_readout(const DensityState& state) {
  const Eigen::Index n = state.dim() - 1;
  return state.rho.topRightCorner(n, 1);
}

DensityState lindblad_evolve(const Sampler& hamiltonian, const std::vector<Sampler>& jumps,
                             const DensityState& rho0, double t, std::int64_t steps,
                             const LindbladOptions& options) {
  return rk4_evolve(hamiltonian, jumps, rho0, t, steps, options, nullptr);
}

double lindblad_step_defect(const Sampler& hamiltonian, const std::vector<Sampler>& jumps,
                            const DensityState& rho0, double t, std::int64_t steps) {
  LindbladOptions loose;
  loose.trace_tolerance = INFINITY;
  const DensityState coarse = rk4_evolve(hamiltonian, jumps, rho0, t, steps, loose, nullptr);
  const DensityState fine = rk4_evolve(hamiltonian, jumps, rho0, t, 2 * steps, loose, nullptr);
  return spectral_norm(coarse.rho - fine.rho);
}

InteractionPictureResult interaction_picture(const Sampler& hamiltonian,
                                             const std::vector<Sampler>& jumps,
                                             const DensityState& rho0, double t,
                                             std::int64_t steps, const LindbladOptions& options) {
  check_density(rho0, "interaction_picture");
  check_time(t, "interaction_picture");
  const Eigen::Index dim = rho0.dim();
  std::function<CMatrix(double)> frame = [dim](double) { return identity(dim); };
  if (hamiltonian && t > 0.0) {
    const Sampler b = [hamiltonian](double s) { return CMatrix(Complex(0.0, -1.0) * hamiltonian(s)); };
    const Propagator prop = Propagator::smooth(b, dim, t, 1e-10);
    frame = [prop](double s) { return prop.at(s); };
  }
  std::vector<Sampler> rotated;
  for (const Sampler& f : jumps) {
    rotated.push_back([f, frame](double s) {
      const CMatrix u = frame(s);
      return CMatrix(u.adjoint() * f(s) * u);
    });
  }

  InteractionPictureResult result;
  const DensityState rho_p = rk4_evolve(Sampler(), rotated, rho0, t, steps, options, &result.rho_p);
  for (std::int64_t n = 0; n <= steps; ++n) {
    result.times.push_back(t * static_cast<double>(n) / static_cast<double>(steps));
  }
  const CMatrix u = frame(t);
  result.reconstructed = {u * rho_p.rho * u.adjoint()};
  result.direct = lindblad_evolve(hamiltonian, jumps, rho0, t, steps, options);
  result.mismatch = spectral_norm(result.reconstructed.rho - result.direct.rho);
  return result;
}

EvolutionReport ndme_evolve(const Generator& gen, double t, std::int64_t steps,
                            const LindbladOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_horizon(gen, t, "ndme_evolve");
  const NdmeEmbedding e = ndme_embed(gen);
  const Eigen::Index n = gen.dim();
  EvolutionReport report;
  report.method = "ndme";
  report.approx = CMatrix::Zero(n, n);
  // Piecewise generators integrate each piece on its own so no step straddles a
  // jump; steps are shared in proportion to piece length.
  struct Span {
    double begin, end;
    Sampler hamiltonian, jump;
  };
  std::vector<Span> spans;
  if (gen.kind() == GeneratorKind::kPiecewiseConstant && t > 0.0) {
    const auto& br = gen.breakpoints();
    for (std::size_t k = 0; k + 1 < br.size() && br[k] < t; ++k) {
      const double b = std::min(br[k + 1], t);
      const double mid = 0.5 * (br[k] + b);
      const CMatrix h = e.hamiltonian(mid), f = e.jump(mid);
      spans.push_back({br[k], b, [h](double) { return h; }, [f](double) { return f; }});
    }
  } else {
    spans.push_back({0.0, t, e.hamiltonian, e.jump});
  }
  double drift = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const DensityState rho0 = ndme_initial_state(CVector::Unit(n, j));
    DensityState rho = rho0;
    for (const Span& span : spans) {
      const double length = span.end - span.begin;
      const auto span_steps = std::max<std::int64_t>(
          1, std::llround(static_cast<double>(steps) * (t > 0.0 ? length / t : 1.0)));
      const double offset = span.begin;
      const Sampler h = span.hamiltonian, f = span.jump;
      rho = lindblad_evolve([h, offset](double s) { return h(offset + s); },
                            {[f, offset](double s) { return f(offset + s); }}, rho, length,
                            span_steps, options);
    }
    report.approx.col(j) = ndme_readout(rho);
    drift = std::max(drift, std::abs(rho.rho.trace() - rho0.rho.trace()));
  }
  report.reference = time_ordered_exp(gen, t, 1e-9).propagator;
  finalize_error(report);
  report.diagnostics["steps"] = static_cast<double>(steps);
  report.diagnostics["trace_drift"] = drift;
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace apskit
