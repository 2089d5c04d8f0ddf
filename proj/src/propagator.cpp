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

#include "apskit/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apskit/errors.hpp"

namespace apskit {

ExpFamily::ExpFamily(const CMatrix& b) : b_(b) {
  require_square(b, "ExpFamily");
  require_finite(b, "ExpFamily");
  if (is_hermitian(b, 1e-14)) {
    mode_ = Mode::kHermitian;
    eig_.emplace(b);
  } else if (is_anti_hermitian(b, 1e-14)) {
    mode_ = Mode::kAntiHermitian;
    eig_.emplace(b * Complex(0.0, -1.0));
  }
}

CMatrix ExpFamily::at(double s) const {
  if (s == 0.0) return identity(b_.rows());
  switch (mode_) {
    case Mode::kHermitian:
      return eig_->apply([s](double v) { return Complex(std::exp(v * s), 0.0); });
    case Mode::kAntiHermitian:
      return eig_->apply([s](double v) { return std::polar(1.0, v * s); });
    case Mode::kGeneral:
      break;
  }
  return expm_taylor(b_ * s);
}

CMatrix magnus4_exponent(const Sampler& b, double t0, double dt) {
  static const double kOffset = std::sqrt(3.0) / 6.0;
  const CMatrix b1 = b(t0 + (0.5 - kOffset) * dt);
  const CMatrix b2 = b(t0 + (0.5 + kOffset) * dt);
  return (b1 + b2) * (0.5 * dt) + commutator(b2, b1) * (std::sqrt(3.0) / 12.0 * dt * dt);
}

struct Propagator::Impl {
  double horizon = 0.0;
  Eigen::Index dim = 0;
  // Piecewise-constant data.
  std::vector<double> breakpoints;
  std::vector<ExpFamily> families;
  // Values at breakpoints (piecewise) or at uniform grid points (smooth).
  std::vector<CMatrix> forward;
  std::vector<CMatrix> backward;
  // Smooth data.
  Sampler b;
  std::int64_t steps = 0;
  double step = 0.0;

  // Returns (segment index, offset within it).
  std::pair<std::size_t, double> locate(double t) const {
    if (!(t >= -1e-12 * (1.0 + horizon)) || t > horizon * (1.0 + 1e-12) + 1e-12) {
      std::ostringstream msg;
      msg << "Propagator: time " << t << " outside [0, " << horizon << "]";
      throw InvalidArgument(msg.str());
    }
    t = std::clamp(t, 0.0, horizon);
    if (!families.empty()) {
      auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
      std::size_t j = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
      j = std::min(j, families.size() - 1);
      return {j, t - breakpoints[j]};
    }
    if (steps == 0) return {0, 0.0};
    auto i = static_cast<std::int64_t>(std::floor(t / step));
    i = std::clamp<std::int64_t>(i, 0, steps - 1);
    return {static_cast<std::size_t>(i), t - step * static_cast<double>(i)};
  }
};

Propagator Propagator::piecewise_constant(std::vector<double> breakpoints,
                                          std::vector<CMatrix> pieces) {
  if (pieces.empty() || breakpoints.size() != pieces.size() + 1) {
    throw InvalidArgument("Propagator::piecewise_constant: need one more breakpoint than pieces");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = pieces.front().rows();
  impl->horizon = breakpoints.back();
  impl->breakpoints = std::move(breakpoints);
  impl->forward.push_back(identity(impl->dim));
  impl->backward.push_back(identity(impl->dim));
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    impl->families.emplace_back(pieces[j]);
    const double len = impl->breakpoints[j + 1] - impl->breakpoints[j];
    impl->forward.push_back(impl->families[j].at(len) * impl->forward.back());
    impl->backward.push_back(impl->backward.back() * impl->families[j].at(-len));
  }
  return Propagator(std::move(impl));
}

Propagator Propagator::smooth(Sampler b, Eigen::Index dim, double horizon, double tol,
                              std::int64_t max_steps) {
  if (!(horizon >= 0.0)) throw InvalidArgument("Propagator::smooth: negative horizon");
  if (!(tol > 0.0)) throw InvalidArgument("Propagator::smooth: tol must be positive");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->horizon = horizon;
  impl->b = std::move(b);
  impl->forward.push_back(identity(dim));
  impl->backward.push_back(identity(dim));
  if (horizon == 0.0) return Propagator(std::move(impl));

  auto endpoint = [&](std::int64_t n) {
    CMatrix u = identity(dim);
    const double h = horizon / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      u = expm_taylor(magnus4_exponent(impl->b, h * static_cast<double>(i), h)) * u;
    }
    return u;
  };
  std::int64_t n = 1;
  CMatrix previous = endpoint(n);
  double defect = std::numeric_limits<double>::infinity();
  while (true) {
    if (n * 2 > max_steps) {
      std::ostringstream msg;
      msg << "Propagator::smooth: not converged, defect " << defect << " at " << n << " steps";
      throw NotConvergedError(msg.str(), defect);
    }
    n *= 2;
    CMatrix current = endpoint(n);
    defect = spectral_norm(current - previous);
    previous = std::move(current);
    if (defect < tol / 10.0) break;
  }

  impl->steps = n;
  impl->step = horizon / static_cast<double>(n);
  impl->forward.reserve(static_cast<std::size_t>(n) + 1);
  impl->backward.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i < n; ++i) {
    const CMatrix omega = magnus4_exponent(impl->b, impl->step * static_cast<double>(i), impl->step);
    impl->forward.push_back(expm_taylor(omega) * impl->forward.back());
    impl->backward.push_back(impl->backward.back() * expm_taylor(-omega));
  }
  return Propagator(std::move(impl));
}

CMatrix Propagator::at(double t) const {
  const auto [j, offset] = impl_->locate(t);
  if (!impl_->families.empty()) return impl_->families[j].at(offset) * impl_->forward[j];
  if (offset == 0.0) return impl_->forward[j];
  const double start = impl_->step * static_cast<double>(j);
  return expm_taylor(magnus4_exponent(impl_->b, start, offset)) * impl_->forward[j];
}

CMatrix Propagator::inverse_at(double t) const {
  const auto [j, offset] = impl_->locate(t);
  if (!impl_->families.empty()) return impl_->backward[j] * impl_->families[j].at(-offset);
  if (offset == 0.0) return impl_->backward[j];
  const double start = impl_->step * static_cast<double>(j);
  return impl_->backward[j] * expm_taylor(-magnus4_exponent(impl_->b, start, offset));
}

double Propagator::horizon() const { return impl_->horizon; }

std::int64_t Propagator::grid_steps() const { return impl_->steps; }

}  // namespace apskit
