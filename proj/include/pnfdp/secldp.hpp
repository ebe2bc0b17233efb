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

// Gaussian DP of correlated-noise gossip (DecoR) against colluding users.

#ifndef PNFDP_SECLDP_HPP_
#define PNFDP_SECLDP_HPP_

#include <cmath>
#include <string>

#include "pnfdp/normal.hpp"
#include "pnfdp/prv.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

struct SecParams {
  int n = 2;
  int q = 0;  // number of colluding users
  double Delta = 1.0;
  double sigma_dp = 1.0;
  double sigma_cor = 0.0;
  double lambda = 0.0;  // Fiedler value of the graph Laplacian

  void Validate() const {
    Require(n >= 1 && q >= 0, "need n >= 1 and q >= 0");
    if (n - q < 1) Fail(ErrorCode::kInvalidArgument, "need n - q >= 1 honest users");
    Require(Delta >= 0.0, "Delta must be >= 0");
    Require(sigma_dp > 0.0, "sigma_dp must be > 0");
    Require(sigma_cor >= 0.0, "sigma_cor must be >= 0");
    Require(lambda >= 0.0, "Laplacian eigenvalue must be >= 0");
  }
};

// mu = Delta sqrt(1/(h s^2) + (1 - 1/h)/(s^2 + lambda s_cor^2)), h = n - q.
inline double SecGdpMu(const SecParams& p) {
  p.Validate();
  const double honest = p.n - p.q;
  const double dp2 = p.sigma_dp * p.sigma_dp;
  const double mixed = dp2 + p.lambda * p.sigma_cor * p.sigma_cor;
  double second = 0.0;
  if (honest > 1.0 && std::isfinite(mixed)) second = (1.0 - 1.0 / honest) / mixed;
  return p.Delta * std::sqrt(1.0 / (honest * dp2) + second);
}

struct SecEpsDelta {
  double mu_round = 0.0;
  double mu_total = 0.0;
  double epsilon = 0.0;              // lattice PRV route (upper bound)
  double epsilon_closed_form = 0.0;  // GDP closed form
};

// Rounds compose in quadrature; epsilon from the lattice PRV of G_{mu_total}
// with the closed form reported alongside.
inline SecEpsDelta SecToEpsDelta(const SecParams& p, int rounds, double delta,
                                 const DiscretizeOptions& dopt = {}) {
  Require(rounds >= 1, "rounds must be >= 1");
  Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  SecEpsDelta r;
  r.mu_round = SecGdpMu(p);
  r.mu_total = r.mu_round * std::sqrt(static_cast<double>(rounds));
  r.epsilon_closed_form = GaussianEpsilon(r.mu_total, delta);
  r.epsilon = Discretize(PrvDistribution::Gaussian(r.mu_total), dopt).EpsilonAt(delta);
  return r;
}

struct SecCalibration {
  double sigma_dp = 0.0;
  double sigma_cor = 0.0;
  double mu_total = 0.0;
};

// Bisection on the common scale s with sigma_dp = s, sigma_cor = ratio s.
inline SecCalibration SecCalibrate(SecParams p, int rounds, double epsilon,
                                   double delta, double cor_ratio,
                                   double lo = 1e-4, double hi = 1e4) {
  Require(cor_ratio >= 0.0, "correlation ratio must be >= 0");
  Require(rounds >= 1, "rounds must be >= 1");
  Require(epsilon >= 0.0 && delta > 0.0 && delta < 1.0, "invalid (eps, delta) target");
  auto delta_at = [&](double s) {
    p.sigma_dp = s;
    p.sigma_cor = cor_ratio * s;
    return GaussianDelta(SecGdpMu(p) * std::sqrt(static_cast<double>(rounds)), epsilon);
  };
  if (delta_at(hi) > delta) {
    Fail(ErrorCode::kNumeric, "target unreachable for noise scale in [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  if (delta_at(lo) > delta) {
    for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
      const double mid = std::sqrt(lo * hi);
      (delta_at(mid) > delta ? lo : hi) = mid;
    }
  } else {
    hi = lo;
  }
  SecCalibration c;
  c.sigma_dp = hi;
  c.sigma_cor = cor_ratio * hi;
  p.sigma_dp = c.sigma_dp;
  p.sigma_cor = c.sigma_cor;
  c.mu_total = SecGdpMu(p) * std::sqrt(static_cast<double>(rounds));
  return c;
}

}  // namespace pnfdp

#endif  // PNFDP_SECLDP_HPP_
