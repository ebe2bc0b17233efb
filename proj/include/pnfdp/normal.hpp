// Copyright 2026 The pnfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Standard normal helpers and the closed forms of Gaussian DP.

#ifndef PNFDP_NORMAL_HPP_
#define PNFDP_NORMAL_HPP_

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace pnfdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Phi(x).
inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// 1 - Phi(x) without cancellation.
inline double NormalSf(double x) { return NormalCdf(-x); }

inline double NormalPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Phi^{-1}(p) for p in [0, 1].
inline double NormalQuantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// Phi^{-1}(1 - q), accurate when q is tiny.
inline double NormalUpperQuantile(double q) { return -NormalQuantile(q); }

// G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu).
inline double GaussianTradeoff(double mu, double alpha) {
  if (alpha <= 0.0) return 1.0;
  if (alpha >= 1.0) return 0.0;
  return NormalCdf(NormalUpperQuantile(alpha) - mu);
}

// Hockey-stick curve of mu-GDP:
// delta(eps) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2).
inline double GaussianDelta(double mu, double epsilon) {
  if (mu <= 0.0) return epsilon >= 0.0 ? 0.0 : -std::expm1(epsilon);
  const double a = NormalCdf(-epsilon / mu + mu / 2.0);
  const double b = NormalCdf(-epsilon / mu - mu / 2.0);
  const double value = a - std::exp(epsilon) * b;
  return value > 0.0 ? value : 0.0;
}

// Smallest eps >= 0 with GaussianDelta(mu, eps) <= delta, by bisection.
inline double GaussianEpsilon(double mu, double delta) {
  if (GaussianDelta(mu, 0.0) <= delta) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (GaussianDelta(mu, hi) > delta) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (GaussianDelta(mu, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace pnfdp

#endif  // PNFDP_NORMAL_HPP_
