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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pnfdp/accountant.hpp"
#include "pnfdp/graphs.hpp"

namespace pnfdp {
namespace {

TransitionMatrix Uniform2() {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  return TransitionMatrix(m);
}

TransitionMatrix Mh(const GraphSpec& g) {
  return BuildTransition(g, TransitionScheme::kMetropolisHastings);
}

AccountingConfig BaseConfig(int T) {
  AccountingConfig cfg;
  cfg.T = T;
  cfg.amp.K = 1;
  cfg.amp.Delta = 1.0;
  cfg.amp.sigma = 1.0;
  cfg.delta = 1e-5;
  return cfg;
}

std::vector<int> Distances(const GraphSpec& g, int from) {
  std::vector<std::vector<int>> adj(g.n);
  for (const auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> dist(g.n, -1);
  std::queue<int> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

// Smallest eps with 0.5 * GaussianDelta(mu, eps) <= target, from the closed form.
double HalfGaussianEpsilon(double mu, double target) {
  double lo = 0.0, hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * GaussianDelta(mu, mid) > target ? lo : hi) = mid;
  }
  return hi;
}

TEST(PairBudgetTest, TwoNodeSingleRoundMatchesMixtureQuery) {
  AccountingConfig cfg = BaseConfig(1);
  cfg.cap_contributions = true;
  const BudgetReport r = PairBudget(Uniform2(), 0, 1, cfg);
  EXPECT_EQ(r.count, 1);
  EXPECT_EQ(r.delta_prime, 0.0);
  EXPECT_EQ(r.delta_conversion, 1e-5);
  EXPECT_DOUBLE_EQ(r.residual, 0.5);

  const HittingWeights hw{0, 1, 1, {0.5}, 0.5};
  const std::vector<double> mus{1.0 / std::sqrt(2.0)};
  const DiscretePrv direct = Discretize(PrvDistribution::Mixture(hw, mus), cfg.discretize);
  EXPECT_EQ(r.epsilon, direct.EpsilonAt(1e-5));

  const double mu = 1.0 / std::sqrt(2.0);
  const double exact = HalfGaussianEpsilon(mu, 1e-5);
  AccountingConfig unbucketed = cfg;
  unbucketed.discretize.mu_resolution = 0.0;
  const double fine = PairBudget(Uniform2(), 0, 1, unbucketed).epsilon;
  EXPECT_GE(fine, exact - 1e-9);
  EXPECT_NEAR(fine, exact, 1e-3);

  // Bucketing rounds mu up by at most a factor 1 + mu_resolution.
  const double rounded_up = HalfGaussianEpsilon(mu * (1.0 + cfg.discretize.mu_resolution), 1e-5);
  EXPECT_GE(r.epsilon, fine - 1e-9);
  EXPECT_LE(r.epsilon, rounded_up + 1e-3);
}

TEST(PairBudgetTest, UnreachableTargetIsPerfectlyPrivate) {
  const BudgetReport r = PairBudget(Mh(graphs::Path(3)), 0, 2, BaseConfig(1));
  EXPECT_EQ(r.residual, 1.0);
  EXPECT_EQ(r.epsilon, 0.0);
}

TEST(PairBudgetTest, RejectsDiagonalAndBrokenHypotheses) {
  EXPECT_THROW(PairBudget(Uniform2(), 1, 1, BaseConfig(3)), Error);
  Eigen::MatrixXd swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  try {
    PairBudget(TransitionMatrix(swap), 0, 1, BaseConfig(3));
    FAIL() << "periodic chain accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("aperiodic"), std::string::npos);
  }
}

TEST(PairBudgetTest, DeltaAccountingSumsToRequest) {
  for (bool cap : {false, true}) {
    AccountingConfig cfg = BaseConfig(400);
    cfg.cap_contributions = cap;
    cfg.conversion_fraction = 0.3;
    const BudgetReport r = PairBudget(Mh(graphs::Ring(6)), 0, 2, cfg);
    EXPECT_NEAR(r.delta_prime + r.delta_conversion, cfg.delta, 1e-20);
    EXPECT_LE(r.delta_trunc, r.delta_conversion);
    if (cap) {
      EXPECT_EQ(r.delta_prime, 0.0);
    } else {
      EXPECT_NEAR(r.delta_prime, 0.7 * cfg.delta, 1e-20);
      EXPECT_NEAR(DeltaPrime(r.lambda2, cfg.T, 6, r.zeta), r.delta_prime, 1e-18);
      EXPECT_EQ(r.count, ContributionCount(cfg.T, 6, r.zeta));
      EXPECT_LT(r.count, cfg.T);
    }
  }
}

TEST(PairBudgetTest, MonotoneInSigma) {
  const std::vector<std::pair<GraphSpec, int>> cases = {
      {graphs::Ring(5), 20}, {graphs::Complete(4), 10}, {graphs::Hypercube(3), 30},
      {graphs::Path(4), 15}, {graphs::Torus(3, 3), 25}};
  for (const auto& [g, T] : cases) {
    AccountingConfig cfg = BaseConfig(T);
    cfg.amp.K = 2;
    const double loose = PairBudget(Mh(g), 0, 1, cfg).epsilon;
    cfg.amp.sigma *= 2.0;
    const double tight = PairBudget(Mh(g), 0, 1, cfg).epsilon;
    EXPECT_LT(tight, loose) << "n=" << g.n;
    EXPECT_GT(tight, 0.0);
  }
}

TEST(PairBudgetTest, MonotoneInHorizonAndSensitivity) {
  const TransitionMatrix w = Mh(graphs::Ring(5));
  AccountingConfig cfg = BaseConfig(10);
  double prev = 0.0;
  for (int T : {10, 20, 40, 80}) {
    cfg.T = T;
    const double eps = PairBudget(w, 0, 2, cfg).epsilon;
    EXPECT_GE(eps, prev);
    prev = eps;
  }
  cfg.T = 20;
  prev = 0.0;
  for (double Delta : {0.25, 0.5, 1.0, 2.0}) {
    cfg.amp.Delta = Delta;
    const double eps = PairBudget(w, 0, 2, cfg).epsilon;
    EXPECT_GT(eps, prev);
    prev = eps;
  }
}

TEST(PairBudgetTest, SingleRoundCapModeIsSingleMixture) {
  const TransitionMatrix w = Mh(graphs::Ring(4));
  AccountingConfig cfg = BaseConfig(1);
  cfg.cap_contributions = true;
  cfg.amp.K = 3;
  const BudgetReport r = PairBudget(w, 0, 1, cfg);
  EXPECT_EQ(r.count, 1);
  const HittingWeights hw = ComputeHittingWeights(w, 0, 1, 1);
  const std::vector<double> mus{MuUserLevel(1, cfg.amp)};
  EXPECT_EQ(r.epsilon,
            Discretize(PrvDistribution::Mixture(hw, mus), cfg.discretize).EpsilonAt(1e-5));
}

// Record-level steps use sensitivity 2 Delta, so amplification wins once the
// sampling rate is small.
TEST(PairBudgetTest, RecordLevelBelowUserLevelForSmallSamplingRate) {
  const std::vector<GraphSpec> graphs_list = {graphs::Ring(5), graphs::Complete(4),
                                             graphs::Hypercube(3), graphs::Path(4),
                                             graphs::Torus(3, 3)};
  for (size_t k = 0; k < graphs_list.size(); ++k) {
    AccountingConfig cfg = BaseConfig(12);
    cfg.amp.K = 2;
    cfg.amp.eta = 0.5;
    cfg.amp.convexity = StronglyConvex{0.5, 1.0};
    cfg.amp.record = RecordSampling{1, 50 * static_cast<int>(k + 1)};
    const TransitionMatrix w = Mh(graphs_list[k]);
    const double user = PairBudget(w, 0, 1, cfg).epsilon;
    cfg.level = PrivacyLevel::kRecord;
    const double record = PairBudget(w, 0, 1, cfg).epsilon;
    EXPECT_LT(record, user) << "graph " << k;
  }
}

TEST(PairBudgetTest, RecordLevelNeedsSamplingFields) {
  AccountingConfig cfg = BaseConfig(4);
  cfg.level = PrivacyLevel::kRecord;
  EXPECT_THROW(PairBudget(Uniform2(), 0, 1, cfg), Error);
}

TEST(PairwiseMatrixTest, SymmetricForSymmetricKernel) {
  const auto m = PairwiseMatrix(Mh(graphs::Ring(5)), BaseConfig(15));
  for (int i = 0; i < 5; ++i) {
    EXPECT_FALSE(m[i][i].applicable);
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      EXPECT_EQ(m[i][j].source, i);
      EXPECT_EQ(m[i][j].target, j);
      EXPECT_NEAR(m[i][j].epsilon, m[j][i].epsilon, 1e-9);
    }
  }
}

TEST(PairwiseMatrixTest, TwoNodesMatchPairBudget) {
  const AccountingConfig cfg = BaseConfig(6);
  const auto m = PairwiseMatrix(Uniform2(), cfg);
  EXPECT_EQ(m[0][1].epsilon, PairBudget(Uniform2(), 0, 1, cfg).epsilon);
  EXPECT_EQ(m[1][0].epsilon, PairBudget(Uniform2(), 1, 0, cfg).epsilon);
}

TEST(PairwiseMatrixTest, MemoizedPairsMatchDirectEvaluation) {
  const GraphSpec g = graphs::Path(5);
  const TransitionMatrix w = Mh(g);
  const AccountingConfig cfg = BaseConfig(10);
  const auto m = PairwiseMatrix(w, cfg);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j) EXPECT_NEAR(m[i][j].epsilon, PairBudget(w, i, j, cfg).epsilon, 1e-9);
    }
  }
}

TEST(PairwiseMatrixTest, NearerPairsLeakMore) {
  const GraphSpec g = graphs::Hypercube(4);
  const auto m = PairwiseMatrix(Mh(g), BaseConfig(40));
  const std::vector<int> dist = Distances(g, 0);
  for (int a = 1; a < g.n; ++a) {
    for (int b = 1; b < g.n; ++b) {
      if (dist[a] < dist[b]) EXPECT_GT(m[0][a].epsilon, m[0][b].epsilon);
      if (dist[a] == dist[b]) EXPECT_NEAR(m[0][a].epsilon, m[0][b].epsilon, 1e-9);
    }
  }
}

TEST(CalibrateSigmaTest, RoundTrip) {
  const TransitionMatrix w = Mh(graphs::Ring(5));
  AccountingConfig cfg = BaseConfig(20);
  for (double target : {0.5, 2.0, 8.0}) {
    const double sigma = CalibrateSigma(w, 0, 1, target, cfg);
    cfg.amp.sigma = sigma;
    const double eps = PairBudget(w, 0, 1, cfg).epsilon;
    EXPECT_LE(eps, target);
    EXPECT_GE(eps, target * (1.0 - 1e-3));
  }
}

TEST(CalibrateSigmaTest, SmallerTargetNeedsMoreNoise) {
  const TransitionMatrix w = Mh(graphs::Complete(4));
  const AccountingConfig cfg = BaseConfig(10);
  double prev = 0.0;
  for (double target : {4.0, 2.0, 1.0, 0.5}) {
    const double sigma = CalibrateSigma(w, 0, 1, target, cfg);
    EXPECT_GT(sigma, prev);
    prev = sigma;
  }
}

TEST(CalibrateSigmaTest, UnreachableTargetReportsBracket) {
  try {
    CalibrateSigma(Uniform2(), 0, 1, 0.01, BaseConfig(5), Bracket{1e-3, 1e-2});
    FAIL() << "unreachable target accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("0.01]"), std::string::npos);
  }
  EXPECT_THROW(CalibrateSigma(Uniform2(), 0, 1, 0.0, BaseConfig(5)), Error);
}

TEST(BisectSigmaTest, FindsThresholdOfKnownCurve) {
  const double sigma = BisectSigma([](double s) { return 3.0 / s; }, 1.5);
  EXPECT_GE(sigma, 2.0);
  EXPECT_LE(sigma, 2.0 * (1.0 + 1e-4));
}

TEST(ConfigTest, Validation) {
  AccountingConfig cfg = BaseConfig(1);
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = BaseConfig(1);
  cfg.conversion_fraction = 1.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.cap_contributions = true;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.T = 0;
  EXPECT_THROW(cfg.Validate(), Error);
}

}  // namespace
}  // namespace pnfdp
