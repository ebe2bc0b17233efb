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

// Pairwise network f-DP accountant for random-walk DP-SGD.
//
// For an ordered pair (i, j) the single-visit leakage is a mixture over the
// first-visit round of the token from i to j, with a perfectly private
// remainder for walks that never arrive. The single-visit PRV is composed
// once per allowed visit of j and queried at the conversion share of delta.

#ifndef PNFDP_ACCOUNTANT_HPP_
#define PNFDP_ACCOUNTANT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pnfdp/amplification.hpp"
#include "pnfdp/composition_count.hpp"
#include "pnfdp/graph_markov.hpp"
#include "pnfdp/prv.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

enum class PrivacyLevel { kUser, kRecord };

struct AccountingConfig {
  int T = 1;
  AmplificationParams amp;
  double delta = 1e-5;
  // Share of delta spent on the PRV conversion; the rest is the visit-count
  // failure probability delta'.
  double conversion_fraction = 0.5;
  PrivacyLevel level = PrivacyLevel::kUser;
  // Nodes stop contributing after `count` visits, so delta' is not charged.
  bool cap_contributions = false;
  GammaPolicy gamma_policy = GammaPolicy::kAllOnes;
  // Long hitting-weight tails carry thousands of near-equal Gaussians.
  DiscretizeOptions discretize{.mu_resolution = 1e-3};
  ComposeOptions compose;

  void Validate() const {
    Require(T >= 1, "T must be >= 1");
    Require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    Require(conversion_fraction > 0.0 && conversion_fraction <= 1.0,
            "conversion fraction must lie in (0, 1]");
    if (!cap_contributions) {
      Require(conversion_fraction < 1.0,
              "without capping, part of delta must cover the visit bound");
    }
    amp.Validate();
    if (level == PrivacyLevel::kRecord && !amp.record) {
      Fail(ErrorCode::kInvalidArgument, "record level needs batch and local size");
    }
  }
};

struct BudgetReport {
  int source = 0;
  int target = 0;
  bool applicable = true;  // false on the diagonal of a matrix
  double epsilon = 0.0;
  std::int64_t count = 0;
  double zeta = 0.0;
  double delta_prime = 0.0;
  double delta_conversion = 0.0;
  double delta_trunc = 0.0;
  double lambda2 = 0.0;
  double residual = 1.0;
  int coarsenings = 0;
};

// Graph-level quantities shared by every pair.
struct NetworkContext {
  SpectralReport spectral;
  VisitBound visits;
  double delta_conversion = 0.0;
};

inline NetworkContext PrepareNetwork(const TransitionMatrix& w,
                                     const AccountingConfig& cfg) {
  cfg.Validate();
  NetworkContext ctx;
  ctx.spectral = Analyze(w);
  std::vector<std::string> failed;
  if (!ctx.spectral.is_irreducible) failed.push_back("irreducible");
  if (!ctx.spectral.is_aperiodic) failed.push_back("aperiodic");
  if (ctx.spectral.lambda2 >= 1.0 - 1e-12) failed.push_back("spectral gap > 0");
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << "transition matrix violates hypotheses:";
    for (const auto& f : failed) msg << ' ' << f;
    Fail(ErrorCode::kValidation, msg.str());
  }
  const double budget_prime = cfg.delta * (1.0 - cfg.conversion_fraction);
  if (budget_prime > 0.0) {
    ctx.visits = VisitBoundFor(ctx.spectral.lambda2, cfg.T, w.n(), budget_prime);
  } else {
    ctx.visits = VisitBound{0.0, 0.0, cfg.T};
  }
  if (cfg.cap_contributions) ctx.visits.delta_prime = 0.0;
  ctx.delta_conversion = cfg.delta - ctx.visits.delta_prime;
  return ctx;
}

// Per-visit lattice PRV for the given first-visit law.
inline DiscretePrv SingleVisitPrv(const HittingWeights& hw,
                                  const AccountingConfig& cfg) {
  if (cfg.level == PrivacyLevel::kUser) {
    std::vector<double> mus(hw.weights.size());
    for (size_t t = 0; t < mus.size(); ++t) {
      mus[t] = hw.weights[t] > 0.0 ? MuUserLevel(static_cast<int>(t) + 1, cfg.amp) : 0.0;
    }
    return Discretize(PrvDistribution::Mixture(hw, mus), cfg.discretize);
  }
  const DiscretePrv at_zero = Discretize(PrvDistribution::PointMass(0.0), cfg.discretize);
  const bool varies_with_t =
      cfg.amp.convexity && cfg.gamma_policy == GammaPolicy::kGridSearch;
  if (!varies_with_t) {
    const CompositionPlan plan = RecordLevelPlan(1, cfg.amp, cfg.gamma_policy,
                                                 cfg.delta, cfg.discretize);
    const double reach = 1.0 - hw.residual;
    if (reach <= 0.0) return at_zero;
    return MixDiscrete({{reach, PlanPrv(plan, cfg.discretize, cfg.compose)},
                        {hw.residual, at_zero}});
  }
  // Plans depend on t through a leading term that shrinks with t; rounds past
  // kDistinct reuse the last (more leaky) plan.
  constexpr int kDistinct = 64;
  std::vector<std::pair<double, DiscretePrv>> parts;
  double tail = 0.0;
  for (size_t t = 0; t < hw.weights.size(); ++t) {
    if (static_cast<int>(t) + 1 < kDistinct) {
      if (hw.weights[t] <= 0.0) continue;
      parts.emplace_back(hw.weights[t],
                         PlanPrv(RecordLevelPlan(static_cast<int>(t) + 1, cfg.amp,
                                                 cfg.gamma_policy, cfg.delta,
                                                 cfg.discretize),
                                 cfg.discretize, cfg.compose));
    } else {
      tail += hw.weights[t];
    }
  }
  if (tail > 0.0) {
    parts.emplace_back(tail, PlanPrv(RecordLevelPlan(kDistinct, cfg.amp,
                                                     cfg.gamma_policy, cfg.delta,
                                                     cfg.discretize),
                                     cfg.discretize, cfg.compose));
  }
  if (hw.residual > 0.0) parts.emplace_back(hw.residual, at_zero);
  // Renormalize against round-off in the hitting weights.
  double total = 0.0;
  for (const auto& part : parts) total += part.first;
  for (auto& part : parts) part.first /= total;
  return MixDiscrete(parts);
}

// Budget for one pair from precomputed hitting weights.
inline BudgetReport BudgetFromWeights(const HittingWeights& hw,
                                      const NetworkContext& ctx,
                                      const AccountingConfig& cfg) {
  BudgetReport r;
  r.source = hw.source;
  r.target = hw.target;
  r.count = ctx.visits.count;
  r.zeta = ctx.visits.zeta;
  r.delta_prime = ctx.visits.delta_prime;
  r.delta_conversion = ctx.delta_conversion;
  r.lambda2 = ctx.spectral.lambda2;
  r.residual = hw.residual;
  if (hw.residual >= 1.0) return r;  // j is never reached: perfect privacy
  const DiscretePrv composed =
      SelfCompose(SingleVisitPrv(hw, cfg), ctx.visits.count, cfg.compose);
  r.delta_trunc = composed.delta_trunc;
  r.coarsenings = composed.coarsenings;
  r.epsilon = composed.EpsilonAt(ctx.delta_conversion);
  return r;
}

inline BudgetReport PairBudget(const TransitionMatrix& w, int i, int j,
                               const AccountingConfig& cfg) {
  if (i == j) Fail(ErrorCode::kInvalidArgument, "pair budget needs i != j");
  const NetworkContext ctx = PrepareNetwork(w, cfg);
  return BudgetFromWeights(ComputeHittingWeights(w, i, j, cfg.T), ctx, cfg);
}

// Worker count from ACCT_THREADS, else the hardware concurrency.
inline unsigned AccountingThreads() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ACCT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = static_cast<unsigned>(v);
  }
  return threads;
}

// All ordered pairs. Pairs whose first-visit laws agree to 12 significant
// digits share one computation (common on vertex-transitive graphs).
inline std::vector<std::vector<BudgetReport>> PairwiseMatrix(
    const TransitionMatrix& w, const AccountingConfig& cfg) {
  const NetworkContext ctx = PrepareNetwork(w, cfg);
  const int n = w.n();
  std::vector<std::vector<BudgetReport>> out(n, std::vector<BudgetReport>(n));
  std::map<std::string, BudgetReport> memo;
  std::mutex memo_mutex;
  std::atomic<int> next_target{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto key_of = [](const HittingWeights& hw) {
    std::ostringstream key;
    key.precision(11);
    key << std::scientific;
    for (double v : hw.weights) key << v << ',';
    key << hw.residual;
    return key.str();
  };
  auto work = [&]() {
    try {
      for (int j = next_target++; j < n; j = next_target++) {
        const auto table = HittingTable(w, j, cfg.T);
        for (int i = 0; i < n; ++i) {
          if (i == j) {
            out[i][j].source = i;
            out[i][j].target = j;
            out[i][j].applicable = false;
            continue;
          }
          HittingWeights hw{i, j, cfg.T, std::vector<double>(cfg.T), 0.0};
          for (int t = 0; t < cfg.T; ++t) hw.weights[t] = table[t][i];
          hw.residual = internal::ResidualOf(hw.weights);
          const std::string key = key_of(hw);
          {
            std::lock_guard<std::mutex> lock(memo_mutex);
            auto it = memo.find(key);
            if (it != memo.end()) {
              out[i][j] = it->second;
              out[i][j].source = i;
              out[i][j].target = j;
              continue;
            }
          }
          BudgetReport r = BudgetFromWeights(hw, ctx, cfg);
          std::lock_guard<std::mutex> lock(memo_mutex);
          memo.emplace(key, r);
          out[i][j] = r;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const unsigned threads = std::min<unsigned>(AccountingThreads(), n);
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Bracket {
  double lo = 1e-3;
  double hi = 1e3;
};

// Smallest sigma in the bracket with epsilon(sigma) <= target, to `rel_tol`
// relative accuracy; epsilon must be non-increasing in sigma.
inline double BisectSigma(const std::function<double(double)>& epsilon_of,
                          double target, Bracket bracket = {},
                          double rel_tol = 1e-4) {
  Require(target > 0.0, "target epsilon must be > 0");
  if (epsilon_of(bracket.hi) > target) {
    std::ostringstream msg;
    msg << "target epsilon " << target << " unreachable for sigma in ["
        << bracket.lo << ", " << bracket.hi << "]";
    Fail(ErrorCode::kNumeric, msg.str());
  }
  // A numeric failure (loss support too wide, truncation floor above the
  // target) only happens for very leaky mechanisms and counts as a miss.
  auto misses = [&](double sigma) {
    try {
      return epsilon_of(sigma) > target;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      return true;
    }
  };
  double lo = bracket.lo, hi = bracket.hi;
  if (!misses(lo)) return lo;
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (misses(mid) ? lo : hi) = mid;
  }
  return hi;
}

inline double CalibrateSigma(const TransitionMatrix& w, int i, int j,
                             double target_epsilon, const AccountingConfig& cfg,
                             Bracket bracket = {}) {
  if (i == j) Fail(ErrorCode::kInvalidArgument, "calibration needs i != j");
  const NetworkContext ctx = PrepareNetwork(w, cfg);
  const HittingWeights hw = ComputeHittingWeights(w, i, j, cfg.T);
  return BisectSigma(
      [&](double sigma) {
        AccountingConfig c = cfg;
        c.amp.sigma = sigma;
        return BudgetFromWeights(hw, ctx, c).epsilon;
      },
      target_epsilon, bracket);
}

}  // namespace pnfdp

#endif  // PNFDP_ACCOUNTANT_HPP_
