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

// Hoeffding-type bound on how often a stationary random walk visits a node.

#ifndef PNFDP_COMPOSITION_COUNT_HPP_
#define PNFDP_COMPOSITION_COUNT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "pnfdp/status.hpp"

namespace pnfdp {

struct VisitBound {
  double zeta = 0.0;
  double delta_prime = 1.0;
  std::int64_t count = 0;
};

namespace internal {

inline void CheckVisitArgs(double lambda2, std::int64_t T, std::int64_t n) {
  Require(T >= 1, "T must be >= 1");
  Require(n >= 2, "n must be >= 2");
  if (!(lambda2 >= -1.0 && lambda2 < 1.0)) {
    Fail(ErrorCode::kInvalidArgument,
         "lambda2 must lie in [-1, 1); a unit eigenvalue means no spectral gap");
  }
}

}  // namespace internal

// exp(-(1 - l2)/(1 + l2) * 2 zeta^2 T / n^2).
inline double DeltaPrime(double lambda2, std::int64_t T, std::int64_t n,
                         double zeta) {
  internal::CheckVisitArgs(lambda2, T, n);
  Require(zeta >= 0.0, "zeta must be >= 0");
  const double nn = static_cast<double>(n);
  return std::exp(-(1.0 - lambda2) / (1.0 + lambda2) * 2.0 * zeta * zeta *
                  static_cast<double>(T) / (nn * nn));
}

inline double ZetaFor(double lambda2, std::int64_t T, std::int64_t n,
                      double delta_prime) {
  internal::CheckVisitArgs(lambda2, T, n);
  Require(delta_prime > 0.0 && delta_prime <= 1.0, "delta' must lie in (0, 1]");
  const double nn = static_cast<double>(n);
  return std::sqrt((1.0 + lambda2) / (1.0 - lambda2) * nn * nn *
                   -std::log(delta_prime) / (2.0 * static_cast<double>(T)));
}

// ceil((1 + zeta) T / n). A small relative slack absorbs round-off when the
// product is an integer up to rounding.
inline std::int64_t ContributionCount(std::int64_t T, std::int64_t n,
                                      double zeta) {
  Require(T >= 1 && n >= 1, "T and n must be >= 1");
  Require(zeta >= 0.0, "zeta must be >= 0");
  const double x = (1.0 + zeta) * static_cast<double>(T) / static_cast<double>(n);
  return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-14)));
}

// Count for a delta' budget; no walk visits a node more than T times, and when
// that cap binds the bound holds surely, so delta' drops to 0.
inline VisitBound VisitBoundFor(double lambda2, std::int64_t T, std::int64_t n,
                                double delta_prime) {
  VisitBound v;
  v.zeta = ZetaFor(lambda2, T, n, delta_prime);
  v.count = ContributionCount(T, n, v.zeta);
  v.delta_prime = delta_prime;
  if (v.count >= T) {
    v.count = T;
    v.delta_prime = 0.0;
  }
  return v;
}

}  // namespace pnfdp

#endif  // PNFDP_COMPOSITION_COUNT_HPP_
