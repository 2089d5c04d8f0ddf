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

#include "apskit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apskit/errors.hpp"

namespace apskit {

namespace {

constexpr int kBoundGridIntervals = 1024;

double time_slack(double horizon) { return 1e-12 * (1.0 + horizon); }

}  // namespace

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kConstant:
      return "constant";
    case GeneratorKind::kPiecewiseConstant:
      return "piecewise";
    case GeneratorKind::kPolynomial:
      return "polynomial";
  }
  return "unknown";
}

Generator Generator::constant(CMatrix a, double horizon) {
  require_square(a, "Generator::constant");
  require_finite(a, "Generator::constant");
  if (a.rows() == 0) throw DimensionError("Generator::constant: empty matrix");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("Generator::constant: horizon must be finite and nonnegative");
  }
  Generator g;
  g.kind_ = GeneratorKind::kConstant;
  g.dim_ = a.rows();
  g.horizon_ = horizon;
  g.matrices_.push_back(std::move(a));
  g.compute_bounds();
  return g;
}

Generator Generator::piecewise(std::vector<double> breakpoints, std::vector<CMatrix> pieces) {
  if (pieces.empty()) throw InvalidArgument("Generator::piecewise: no pieces");
  if (breakpoints.size() != pieces.size() + 1) {
    throw InvalidArgument("Generator::piecewise: need one more breakpoint than pieces");
  }
  if (breakpoints.front() != 0.0) {
    throw InvalidArgument("Generator::piecewise: first breakpoint must be 0");
  }
  for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
    if (!(breakpoints[j + 1] > breakpoints[j]) || !std::isfinite(breakpoints[j + 1])) {
      throw InvalidArgument("Generator::piecewise: breakpoints must be strictly increasing");
    }
  }
  const Eigen::Index dim = pieces.front().rows();
  if (dim == 0) throw DimensionError("Generator::piecewise: empty matrix");
  for (const auto& p : pieces) {
    require_square(p, "Generator::piecewise", dim);
    require_finite(p, "Generator::piecewise");
  }
  Generator g;
  g.kind_ = GeneratorKind::kPiecewiseConstant;
  g.dim_ = dim;
  g.horizon_ = breakpoints.back();
  g.breakpoints_ = std::move(breakpoints);
  g.matrices_ = std::move(pieces);
  g.compute_bounds();
  return g;
}

Generator Generator::polynomial(std::vector<CMatrix> coefficients, double horizon) {
  if (coefficients.empty()) throw InvalidArgument("Generator::polynomial: no coefficients");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("Generator::polynomial: horizon must be finite and nonnegative");
  }
  const Eigen::Index dim = coefficients.front().rows();
  if (dim == 0) throw DimensionError("Generator::polynomial: empty matrix");
  for (const auto& c : coefficients) {
    require_square(c, "Generator::polynomial", dim);
    require_finite(c, "Generator::polynomial");
  }
  Generator g;
  g.kind_ = GeneratorKind::kPolynomial;
  g.dim_ = dim;
  g.horizon_ = horizon;
  g.matrices_ = std::move(coefficients);
  g.compute_bounds();
  return g;
}

Generator Generator::with_horizon(double horizon) const {
  switch (kind_) {
    case GeneratorKind::kConstant:
      return constant(matrices_.front(), horizon);
    case GeneratorKind::kPolynomial:
      return polynomial(matrices_, horizon);
    case GeneratorKind::kPiecewiseConstant:
      break;
  }
  throw InvalidArgument("Generator::with_horizon: piecewise horizons are fixed by breakpoints");
}

void Generator::check_time(double t) const {
  if (!(t >= -time_slack(horizon_)) || !(t <= horizon_ + time_slack(horizon_))) {
    std::ostringstream msg;
    msg << "Generator: time " << t << " outside [0, " << horizon_ << "]";
    throw InvalidArgument(msg.str());
  }
}

CMatrix Generator::sample(double t) const {
  check_time(t);
  switch (kind_) {
    case GeneratorKind::kConstant:
      return matrices_.front();
    case GeneratorKind::kPiecewiseConstant: {
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
      std::size_t j = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
      return matrices_[std::min(j, matrices_.size() - 1)];
    }
    case GeneratorKind::kPolynomial: {
      // Horner.
      CMatrix acc = matrices_.back();
      for (std::size_t k = matrices_.size() - 1; k-- > 0;) acc = acc * t + matrices_[k];
      return acc;
    }
  }
  return {};
}

CMatrix Generator::derivative(double t) const {
  check_time(t);
  if (kind_ != GeneratorKind::kPolynomial || matrices_.size() < 2) {
    return CMatrix::Zero(dim_, dim_);
  }
  CMatrix acc = matrices_.back() * static_cast<double>(matrices_.size() - 1);
  for (std::size_t k = matrices_.size() - 1; k-- > 1;) {
    acc = acc * t + matrices_[k] * static_cast<double>(k);
  }
  return acc;
}

Sampler Generator::sampler() const {
  return [g = *this](double t) { return g.sample(t); };
}

void Generator::compute_bounds() {
  GeneratorBounds b;
  auto visit = [&b](const CMatrix& a) {
    const CartesianParts parts = cartesian_split(a);
    b.a_max = std::max(b.a_max, spectral_norm(a));
    b.a1_max = std::max(b.a1_max, spectral_norm(parts.dissipative));
    b.a2_max = std::max(b.a2_max, spectral_norm(parts.hamiltonian));
    b.a1_min_eigenvalue = std::min(b.a1_min_eigenvalue, min_eigenvalue(parts.dissipative));
  };
  b.a1_min_eigenvalue = std::numeric_limits<double>::infinity();

  switch (kind_) {
    case GeneratorKind::kConstant:
      visit(matrices_.front());
      b.a1_rate_max = 0.0;
      break;
    case GeneratorKind::kPiecewiseConstant:
      for (const auto& p : matrices_) visit(p);
      b.a1_rate_max = std::numeric_limits<double>::infinity();
      b.rate_applicable = matrices_.size() == 1;
      if (b.rate_applicable) b.a1_rate_max = 0.0;
      break;
    case GeneratorKind::kPolynomial: {
      // Grid values plus half a grid step times a Lipschitz constant, so the
      // result bounds the supremum over the whole interval.
      const double T = horizon_;
      double lip1 = 0.0;  // sup ||A'||
      double lip2 = 0.0;  // sup ||A''||
      for (std::size_t k = 1; k < matrices_.size(); ++k) {
        const double c = spectral_norm(matrices_[k]);
        lip1 += static_cast<double>(k) * c * std::pow(T, static_cast<double>(k - 1));
        if (k >= 2) {
          lip2 += static_cast<double>(k * (k - 1)) * c * std::pow(T, static_cast<double>(k - 2));
        }
      }
      double rate = 0.0;
      const int n = T > 0.0 ? kBoundGridIntervals : 0;
      for (int i = 0; i <= n; ++i) {
        const double t = n ? T * i / n : 0.0;
        visit(sample(t));
        const CMatrix d = derivative(t);
        rate = std::max(rate, spectral_norm((d + d.adjoint()) * 0.5));
      }
      const double half_step = n ? 0.5 * T / n : 0.0;
      b.a_max += half_step * lip1;
      b.a1_max += half_step * lip1;
      b.a2_max += half_step * lip1;
      b.a1_min_eigenvalue -= half_step * lip1;
      b.a1_rate_max = rate + half_step * lip2;
      break;
    }
  }
  bounds_ = b;
}

BoundAudit audit_bounds(const Generator& gen, int grid_points) {
  if (grid_points < 2) throw InvalidArgument("audit_bounds: grid_points must be >= 2");
  BoundAudit audit;
  audit.grid_points = grid_points;
  audit.a1_min_eigenvalue = std::numeric_limits<double>::infinity();
  const double T = gen.horizon();
  const double step = T / (grid_points - 1);
  CMatrix previous_a1;
  for (int i = 0; i < grid_points; ++i) {
    const double t = i + 1 == grid_points ? T : step * i;
    const CMatrix a = gen.sample(t);
    const CartesianParts parts = cartesian_split(a);
    audit.a_max = std::max(audit.a_max, spectral_norm(a));
    audit.a1_max = std::max(audit.a1_max, spectral_norm(parts.dissipative));
    audit.a2_max = std::max(audit.a2_max, spectral_norm(parts.hamiltonian));
    audit.a1_min_eigenvalue = std::min(audit.a1_min_eigenvalue, min_eigenvalue(parts.dissipative));
    if (i > 0 && step > 0.0) {
      audit.a1_rate_max =
          std::max(audit.a1_rate_max, spectral_norm(parts.dissipative - previous_a1) / step);
    }
    previous_a1 = parts.dissipative;
  }

  const GeneratorBounds& cached = gen.bounds();
  auto exceeds = [](double audited, double bound) {
    return audited > bound + 1e-12 * (1.0 + std::abs(bound));
  };
  if (exceeds(audit.a_max, cached.a_max)) audit.violations.push_back("a_max");
  if (exceeds(audit.a1_max, cached.a1_max)) audit.violations.push_back("a1_max");
  if (exceeds(audit.a2_max, cached.a2_max)) audit.violations.push_back("a2_max");
  // Forward differences carry a rounding error of order eps * ||A1|| / step.
  const double difference_noise =
      step > 0.0 ? 64.0 * std::numeric_limits<double>::epsilon() * audit.a1_max / step : 0.0;
  if (cached.rate_applicable && exceeds(audit.a1_rate_max - difference_noise, cached.a1_rate_max)) {
    audit.violations.push_back("a1_rate_max");
  }
  if (exceeds(-audit.a1_min_eigenvalue, -cached.a1_min_eigenvalue)) {
    audit.violations.push_back("a1_min_eigenvalue");
  }
  return audit;
}

}  // namespace apskit
