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

// Renyi-DP baseline accountant: mixtures through joint convexity of the
// scaled exponentiated divergence, additive composition, and conversion to
// (eps, delta).

#ifndef PNFDP_RDP_HPP_
#define PNFDP_RDP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pnfdp/accountant.hpp"
#include "pnfdp/graph_markov.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

// {1 + 2^k/16 : k = 0..14} union {2, ..., 64}, ascending.
inline std::vector<double> RdpOrderGrid() {
  std::vector<double> orders;
  for (int k = 0; k <= 14; ++k) orders.push_back(1.0 + std::ldexp(1.0, k) / 16.0);
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  return orders;
}

struct RdpProfile {
  std::vector<double> orders;
  std::vector<double> epsilons;
};

// (1/(a-1)) log(sum_t w_t exp((a-1) a mu_t^2 / 2) + residual).
inline double RdpMixture(std::span<const double> weights, double residual,
                         std::span<const double> mus, double order) {
  Require(order > 1.0, "RDP order must be > 1");
  Require(weights.size() == mus.size(), "rdp_mixture: one mu per weight required");
  std::vector<double> logs;
  logs.reserve(weights.size() + 1);
  for (size_t t = 0; t < weights.size(); ++t) {
    if (weights[t] <= 0.0) continue;
    logs.push_back(std::log(weights[t]) + (order - 1.0) * order * mus[t] * mus[t] / 2.0);
  }
  if (residual > 0.0) logs.push_back(std::log(residual));
  if (logs.empty()) return 0.0;
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - peak);
  return std::max(0.0, (peak + std::log(acc)) / (order - 1.0));
}

inline double RdpMixture(const HittingWeights& hw, std::span<const double> mus,
                         double order) {
  return RdpMixture(hw.weights, hw.residual, mus, order);
}

inline RdpProfile GaussianRdpProfile(double mu,
                                     const std::vector<double>& orders = RdpOrderGrid()) {
  RdpProfile p{orders, {}};
  for (double a : orders) p.epsilons.push_back(0.5 * mu * mu * a);
  return p;
}

inline RdpProfile MixtureRdpProfile(const HittingWeights& hw,
                                    std::span<const double> mus,
                                    const std::vector<double>& orders = RdpOrderGrid()) {
  RdpProfile p{orders, {}};
  for (double a : orders) p.epsilons.push_back(RdpMixture(hw, mus, a));
  return p;
}

inline RdpProfile RdpCompose(RdpProfile profile, std::int64_t count) {
  Require(count >= 1, "rdp_compose: count must be >= 1");
  for (double& e : profile.epsilons) e *= static_cast<double>(count);
  return profile;
}

enum class RdpConversion { kBest, kClassic, kImproved };

// Classic:  eps(a) + log(1/delta)/(a-1).
// Improved: eps(a) + log((a-1)/a) - (log delta + log a)/(a-1).
inline double RdpToEpsilon(const RdpProfile& profile, double delta,
                           RdpConversion rule = RdpConversion::kBest) {
  Require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  if (profile.orders.empty()) Fail(ErrorCode::kInvalidArgument, "empty RDP order grid");
  double best = kInf;
  for (size_t k = 0; k < profile.orders.size(); ++k) {
    const double a = profile.orders[k];
    const double e = profile.epsilons[k];
    if (rule != RdpConversion::kImproved) {
      best = std::min(best, e + std::log(1.0 / delta) / (a - 1.0));
    }
    if (rule != RdpConversion::kClassic) {
      best = std::min(best, e + std::log((a - 1.0) / a) -
                                (std::log(delta) + std::log(a)) / (a - 1.0));
    }
  }
  return std::max(0.0, best);
}

enum class RdpWeighting { kPowerOfW, kHittingTime };

struct RdpBudgetReport {
  double epsilon = 0.0;
  double best_order = 0.0;
  std::int64_t count = 0;
};

inline RdpBudgetReport RdpBudgetFromWeights(const HittingWeights& hw,
                                            const NetworkContext& ctx,
                                            const AccountingConfig& cfg) {
  if (cfg.level != PrivacyLevel::kUser) {
    Fail(ErrorCode::kInvalidArgument,
         "RDP baseline supports user level only (no subsampled RDP)");
  }
  std::vector<double> mus(hw.weights.size());
  for (size_t t = 0; t < mus.size(); ++t) {
    mus[t] = MuUserLevel(static_cast<int>(t) + 1, cfg.amp);
  }
  const RdpProfile composed = RdpCompose(MixtureRdpProfile(hw, mus), ctx.visits.count);
  RdpBudgetReport r;
  r.count = ctx.visits.count;
  r.epsilon = RdpToEpsilon(composed, ctx.delta_conversion);
  double best = kInf;
  for (size_t k = 0; k < composed.orders.size(); ++k) {
    const double v = RdpToEpsilon({{composed.orders[k]}, {composed.epsilons[k]}},
                                  ctx.delta_conversion);
    if (v < best) {
      best = v;
      r.best_order = composed.orders[k];
    }
  }
  return r;
}

inline HittingWeights RdpWeights(const TransitionMatrix& w, int i, int j, int T,
                                 RdpWeighting weighting) {
  return weighting == RdpWeighting::kPowerOfW ? PowerWeights(w, i, j, T)
                                              : ComputeHittingWeights(w, i, j, T);
}

inline RdpBudgetReport RdpPairBudget(const TransitionMatrix& w, int i, int j,
                                     const AccountingConfig& cfg,
                                     RdpWeighting weighting) {
  if (i == j) Fail(ErrorCode::kInvalidArgument, "pair budget needs i != j");
  const NetworkContext ctx = PrepareNetwork(w, cfg);
  return RdpBudgetFromWeights(RdpWeights(w, i, j, cfg.T, weighting), ctx, cfg);
}

inline double RdpCalibrateSigma(const TransitionMatrix& w, int i, int j,
                                double target_epsilon, const AccountingConfig& cfg,
                                RdpWeighting weighting, Bracket bracket = {}) {
  if (i == j) Fail(ErrorCode::kInvalidArgument, "calibration needs i != j");
  const NetworkContext ctx = PrepareNetwork(w, cfg);
  const HittingWeights hw = RdpWeights(w, i, j, cfg.T, weighting);
  return BisectSigma(
      [&](double sigma) {
        AccountingConfig c = cfg;
        c.amp.sigma = sigma;
        return RdpBudgetFromWeights(hw, ctx, c).epsilon;
      },
      target_epsilon, bracket);
}

}  // namespace pnfdp

#endif  // PNFDP_RDP_HPP_
