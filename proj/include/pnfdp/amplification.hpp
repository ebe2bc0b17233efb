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

// Per-visit Gaussian parameters for the local-update phase of a random-walk
// DP-SGD, both at user level (one Gaussian per first-visit round) and at
// record level (a composition plan of subsampled Gaussians).

#ifndef PNFDP_AMPLIFICATION_HPP_
#define PNFDP_AMPLIFICATION_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pnfdp/prv.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

struct StronglyConvex {
  double m = 1.0;  // strong convexity
  double M = 1.0;  // smoothness
};

struct RecordSampling {
  int batch = 1;
  int local_size = 1;
  double rate() const { return static_cast<double>(batch) / local_size; }
};

struct AmplificationParams {
  int K = 1;
  double eta = 0.1;
  double Delta = 1.0;
  double sigma = 1.0;
  std::optional<StronglyConvex> convexity;  // nullopt means non-convex
  std::optional<RecordSampling> record;
  // Record level, non-convex: scale components by Delta/(eta sigma) instead of
  // Delta/sigma.
  bool literal_eta_scaling = false;

  void Validate() const {
    Require(K >= 1, "K must be >= 1");
    Require(sigma > 0.0 && std::isfinite(sigma), "sigma must be > 0");
    Require(Delta >= 0.0 && std::isfinite(Delta), "Delta must be >= 0");
    Require(eta > 0.0, "eta must be > 0");
    if (convexity) {
      Require(convexity->m > 0.0 && convexity->m <= convexity->M,
              "strong convexity needs 0 < m <= M");
      if (eta >= 2.0 / convexity->M) {
        Fail(ErrorCode::kInvalidArgument,
             "eta must lie in (0, 2/M); contraction factor would exceed 1");
      }
    }
    if (record) {
      Require(record->batch >= 1 && record->batch <= record->local_size,
              "record sampling needs 1 <= b <= m_i");
    }
  }

  // c = max{|1 - eta m|, |1 - eta M|}; 1 for non-convex losses.
  double Contraction() const {
    if (!convexity) return 1.0;
    return std::max(std::abs(1.0 - eta * convexity->m),
                    std::abs(1.0 - eta * convexity->M));
  }
};

// Closed-form minimum of sum a_k^2 over the shift schedule, with s = eta Delta:
// c^{2K(t-1)} (1+c)/(1-c) (1-c^K)^2/(1-c^{2tK}) s^2. Evaluated as
// c^{2K(t-1)} (1+c)/(1+c^{tK}) (1-c^K)/(1-c) (1-c^K)/(1-c^{tK}) s^2 so that
// every ratio is exactly 1 at K = t = 1.
inline double SumSquaresClosedForm(double c, int K, int t, double s) {
  Require(c >= 0.0 && c < 1.0, "closed form needs 0 <= c < 1");
  if (c == 0.0) return t == 1 ? s * s : 0.0;
  const double log_c = std::log(c);
  const double kt = static_cast<double>(K) * t;
  auto one_minus_pow = [log_c](double e) { return -std::expm1(e * log_c); };
  return std::exp(2.0 * K * (t - 1) * log_c) * ((1.0 + c) / (1.0 + std::exp(kt * log_c))) *
         (one_minus_pow(K) / one_minus_pow(1.0)) * (one_minus_pow(K) / one_minus_pow(kt)) *
         s * s;
}

inline double MuUserLevel(int t, const AmplificationParams& params) {
  params.Validate();
  Require(t >= 1, "first-visit round t must be >= 1");
  const double c = params.Contraction();
  const double ratio = params.Delta / params.sigma;
  const int K = params.K;
  if (c >= 1.0) {
    return std::sqrt(static_cast<double>(K)) * ratio /
           std::sqrt(static_cast<double>(t) * K + 1.0);
  }
  return std::sqrt(SumSquaresClosedForm(c, K, t, 1.0)) * ratio;
}

struct SumSquaresResult {
  double numeric = 0.0;
  double closed_form = 0.0;
  double gap = 0.0;  // |numeric - closed_form| / closed_form
  std::vector<double> gammas;
  int sweeps = 0;
};

namespace internal {

// sum a_k^2 for a split schedule; s_k = s for k <= K, 0 afterwards.
inline double ShiftCost(const std::vector<double>& gamma, double c, int K,
                        double s) {
  double b = 0.0, cost = 0.0;
  for (size_t k = 0; k < gamma.size(); ++k) {
    const double x = c * b + (static_cast<int>(k) < K ? s : 0.0);
    const double a = gamma[k] * x;
    b = x - a;
    cost += a * a;
  }
  return cost;
}

}  // namespace internal

// Minimizes sum a_k^2 over gamma in [0,1]^{tK} with b_{tK} = 0 (so the last
// gamma is 1) by exact coordinate descent: the cost is a quadratic in each
// coordinate.
inline SumSquaresResult OptimalSumSquares(const AmplificationParams& params,
                                          int t, int max_sweeps = 200000,
                                          double tol = 1e-15) {
  params.Validate();
  const double c = params.Contraction();
  if (c >= 1.0) Fail(ErrorCode::kInvalidArgument, "sum-of-squares oracle needs c < 1");
  Require(t >= 1, "t must be >= 1");
  const int K = params.K;
  const double s = params.eta * params.Delta;
  const int n = K * t;
  SumSquaresResult r;
  r.closed_form = SumSquaresClosedForm(c, K, t, s);
  std::vector<double> gamma(n, 1.0);
  for (int k = 0; k < n - 1; ++k) gamma[k] = k < K ? 1.0 / (K - k) : 0.5;
  double cost = internal::ShiftCost(gamma, c, K, s);
  for (r.sweeps = 1; r.sweeps <= max_sweeps; ++r.sweeps) {
    const double before = cost;
    for (int k = 0; k < n - 1; ++k) {
      gamma[k] = 0.0;
      const double f0 = internal::ShiftCost(gamma, c, K, s);
      gamma[k] = 0.5;
      const double fh = internal::ShiftCost(gamma, c, K, s);
      gamma[k] = 1.0;
      const double f1 = internal::ShiftCost(gamma, c, K, s);
      const double curv = 2.0 * (f0 + f1 - 2.0 * fh);
      double g = f1 < f0 ? 1.0 : 0.0;
      if (curv > 0.0) {
        g = std::clamp(0.5 - (f1 - f0) / (2.0 * curv), 0.0, 1.0);
      }
      gamma[k] = g;
    }
    cost = internal::ShiftCost(gamma, c, K, s);
    if (before - cost <= tol * before) break;
  }
  r.numeric = cost;
  r.gammas = std::move(gamma);
  r.gap = r.closed_form > 0.0 ? std::abs(r.numeric - r.closed_form) / r.closed_form
                              : std::abs(r.numeric);
  return r;
}

struct PlanComponent {
  enum class Kind { kGaussian, kSubsampled };
  Kind kind = Kind::kGaussian;
  double mu = 0.0;
  double p = 1.0;
  std::string note;
};

struct CompositionPlan {
  std::vector<PlanComponent> components;
  double gamma = 1.0;  // split constant used to build the plan
};

enum class GammaPolicy { kAllOnes, kGridSearch };

namespace internal {

inline CompositionPlan PlanForGamma(int t, const AmplificationParams& params,
                                    double gamma) {
  const double p = params.record->rate();
  const int K = params.K;
  CompositionPlan plan;
  plan.gamma = gamma;
  if (!params.convexity) {
    const double scale = params.literal_eta_scaling ? params.eta : 1.0;
    for (int k = 0; k < K; ++k) {
      plan.components.push_back({PlanComponent::Kind::kSubsampled,
                                 params.Delta / (scale * params.sigma), p,
                                 "local step " + std::to_string(k + 1)});
    }
    return plan;
  }
  const double c = params.Contraction();
  const double es = params.eta * params.sigma;
  double b = 0.0;
  for (int k = 0; k < K; ++k) {
    const double x = c * b + params.eta * params.Delta;
    const double a = gamma * x;
    b = std::max(c * b, (1.0 - gamma) * x);
    plan.components.push_back({PlanComponent::Kind::kSubsampled, 2.0 * a / es, p,
                               "local step " + std::to_string(k + 1)});
  }
  const double lead = 2.0 * std::sqrt(2.0) * std::pow(c, (t - 1.0) * K) * b / es;
  if (lead > 0.0) {
    plan.components.insert(plan.components.begin(),
                           {PlanComponent::Kind::kGaussian, lead, 1.0,
                            "residual shift after local steps"});
  }
  return plan;
}

}  // namespace internal

// Composes the plan's components into one lattice PRV.
inline DiscretePrv PlanPrv(const CompositionPlan& plan,
                           const DiscretizeOptions& dopt = {},
                           const ComposeOptions& copt = {}) {
  Require(!plan.components.empty(), "composition plan is empty");
  std::optional<DiscretePrv> acc;
  size_t k = 0;
  while (k < plan.components.size()) {
    // Identical consecutive components are self-composed in one go.
    size_t run = 1;
    const auto& c = plan.components[k];
    while (k + run < plan.components.size() &&
           plan.components[k + run].kind == c.kind &&
           plan.components[k + run].mu == c.mu && plan.components[k + run].p == c.p) {
      ++run;
    }
    const PrvDistribution prv = c.kind == PlanComponent::Kind::kGaussian
                                    ? PrvDistribution::Gaussian(c.mu)
                                    : PrvDistribution::SubsampledGaussian(c.mu, c.p);
    DiscretePrv part = SelfCompose(Discretize(prv, dopt), static_cast<std::int64_t>(run), copt);
    acc = acc ? Compose(*acc, part, copt) : part;
    k += run;
  }
  return *acc;
}

// Record-level plan for first-visit round t. kGridSearch scans constant
// gamma in {0.1, ..., 1.0} and keeps the plan with the smallest epsilon at
// `delta`.
inline CompositionPlan RecordLevelPlan(int t, const AmplificationParams& params,
                                       GammaPolicy policy = GammaPolicy::kAllOnes,
                                       double delta = 1e-5,
                                       const DiscretizeOptions& dopt = {}) {
  params.Validate();
  Require(t >= 1, "first-visit round t must be >= 1");
  if (!params.record) {
    Fail(ErrorCode::kInvalidArgument, "record-level plan needs batch and local size");
  }
  if (policy == GammaPolicy::kAllOnes || !params.convexity) {
    return internal::PlanForGamma(t, params, 1.0);
  }
  CompositionPlan best;
  double best_eps = kInf;
  for (int g = 10; g >= 1; --g) {
    CompositionPlan plan = internal::PlanForGamma(t, params, g / 10.0);
    const double eps = PlanPrv(plan, dopt).EpsilonAt(delta);
    if (eps < best_eps) {
      best_eps = eps;
      best = std::move(plan);
    }
  }
  return best;
}

}  // namespace pnfdp

#endif  // PNFDP_AMPLIFICATION_HPP_
