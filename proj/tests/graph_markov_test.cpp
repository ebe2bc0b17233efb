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

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pnfdp/graph_markov.hpp"
#include "pnfdp/graphs.hpp"

namespace pnfdp {
namespace {

GraphSpec EdgeList(int n, std::vector<Edge> edges) {
  GraphSpec g;
  g.n = n;
  g.edges = std::move(edges);
  return g;
}

TransitionMatrix Uniform2() {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  return TransitionMatrix(m);
}

// First-visit law from powers of the chain with j made absorbing (i != j).
std::vector<double> AbsorbingOracle(const TransitionMatrix& w, int i, int j, int T) {
  Eigen::MatrixXd a = w.dense();
  a.row(j).setZero();
  a(j, j) = 1.0;
  std::vector<double> out;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(w.n(), w.n());
  double prev = 0.0;
  for (int t = 1; t <= T; ++t) {
    p = p * a;
    out.push_back(p(i, j) - prev);
    prev = p(i, j);
  }
  return out;
}

TEST(GraphSpecTest, RejectsBadEdges) {
  GraphSpec g = EdgeList(3, {{0, 3}});
  EXPECT_THROW(g.Validate(), Error);
  g.edges = {{0, 1}, {1, 0}};
  EXPECT_THROW(g.Validate(), Error);
  g.edges = {{1, 1}};
  EXPECT_THROW(g.Validate(), Error);
  g.edges = {{0, 1}, {1, 2}};
  g.matrix = std::vector<std::vector<double>>{{1.0, 0.0}};
  EXPECT_THROW(g.Validate(), Error);
}

TEST(BuildTransitionTest, LazyWalkOnSingleEdge) {
  const TransitionMatrix w =
      BuildTransition(graphs::Path(2), TransitionScheme::kLazySimpleWalk);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(w(i, j), 0.5);
  }
}

TEST(BuildTransitionTest, MetropolisOnTriangle) {
  const TransitionMatrix w =
      BuildTransition(graphs::Complete(3), TransitionScheme::kMetropolisHastings);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(w(i, j), 1.0 / 3.0, 1e-15);
  }
}

TEST(BuildTransitionTest, ExplicitPassthrough) {
  GraphSpec g = EdgeList(2, {{0, 1}});
  g.matrix = std::vector<std::vector<double>>{{0.5, 0.5}, {0.5, 0.5}};
  const TransitionMatrix w = BuildTransition(g, TransitionScheme::kExplicit);
  EXPECT_EQ(w.dense(), Uniform2().dense());
}

TEST(BuildTransitionTest, ExplicitNonStochasticIsFormatError) {
  GraphSpec g = EdgeList(2, {{0, 1}});
  g.matrix = std::vector<std::vector<double>>{{0.5, 0.4}, {0.5, 0.5}};
  try {
    BuildTransition(g, TransitionScheme::kExplicit);
    FAIL() << "expected a format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

TEST(BuildTransitionTest, DisconnectedIsValidationError) {
  GraphSpec g = EdgeList(4, {{0, 1}, {2, 3}});
  for (auto scheme : {TransitionScheme::kMetropolisHastings,
                      TransitionScheme::kLazySimpleWalk}) {
    try {
      BuildTransition(g, scheme);
      FAIL() << "expected a validation error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kValidation);
    }
  }
}

TEST(BuildTransitionTest, RowsStochasticSymmetricAndSupportedOnEdges) {
  const GraphSpec g = graphs::RandomConnected(12, 0.3, 7);
  const auto adj = g.Adjacency();
  for (auto scheme : {TransitionScheme::kMetropolisHastings,
                      TransitionScheme::kLazySimpleWalk}) {
    const TransitionMatrix w = BuildTransition(g, scheme);
    EXPECT_TRUE(w.IsSymmetric() || scheme == TransitionScheme::kLazySimpleWalk);
    for (int i = 0; i < w.n(); ++i) {
      EXPECT_NEAR(w.dense().row(i).sum(), 1.0, 1e-12);
      for (int j = 0; j < w.n(); ++j) {
        if (i == j || w(i, j) == 0.0) continue;
        EXPECT_TRUE(std::find(adj[i].begin(), adj[i].end(), j) != adj[i].end());
      }
    }
  }
}

TEST(AnalyzeTest, RankOneKernel) {
  const SpectralReport r = Analyze(Uniform2());
  EXPECT_NEAR(r.lambda2, 0.0, 1e-12);
  EXPECT_NEAR(r.spectral_gap, 1.0, 1e-12);
  EXPECT_NEAR(r.stationary[0], 0.5, 1e-12);
  EXPECT_NEAR(r.stationary[1], 0.5, 1e-12);
  EXPECT_TRUE(r.is_irreducible);
  EXPECT_TRUE(r.is_aperiodic);
}

TEST(AnalyzeTest, ThreeCycleWithoutSelfLoops) {
  Eigen::MatrixXd m(3, 3);
  m << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0;
  const SpectralReport r = Analyze(TransitionMatrix(m));
  EXPECT_NEAR(r.lambda2, -0.5, 1e-12);
  EXPECT_NEAR(r.spectral_gap, 1.5, 1e-12);
  // Return times 2 and 3 are both possible, so the period is 1.
  EXPECT_TRUE(r.is_aperiodic);
}

TEST(AnalyzeTest, BipartiteWalkIsPeriodic) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  const SpectralReport r = Analyze(TransitionMatrix(m));
  EXPECT_FALSE(r.is_aperiodic);
  EXPECT_NEAR(r.lambda2, -1.0, 1e-12);
}

TEST(AnalyzeTest, HypercubeMetropolisGapMatchesTableValue) {
  const SpectralReport r = Analyze(
      BuildTransition(graphs::Hypercube(5), TransitionScheme::kMetropolisHastings));
  // W = (I + A)/6 with adjacency spectrum {5, 3, ...}: lambda2 = 2/3.
  EXPECT_NEAR(r.lambda2, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.spectral_gap, 0.33333, 1e-5);
}

TEST(AnalyzeTest, AsymmetricNeedsOptIn) {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.5, 0.25, 0.75;
  const TransitionMatrix w(m);
  EXPECT_THROW(Analyze(w), Error);
  const SpectralReport r = Analyze(w, /*allow_asymmetric=*/true);
  EXPECT_FALSE(r.is_symmetric);
}

TEST(AnalyzeTest, SymmetricIrreducibleHasUniformStationary) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TransitionMatrix w = BuildTransition(graphs::RandomConnected(15, 0.25, seed),
                                               TransitionScheme::kMetropolisHastings);
    const SpectralReport r = Analyze(w);
    EXPECT_TRUE(r.is_irreducible);
    EXPECT_LE(std::abs(r.lambda2), 1.0);
    EXPECT_LT(r.lambda2, 1.0);
    EXPECT_NEAR(std::accumulate(r.stationary.begin(), r.stationary.end(), 0.0), 1.0, 1e-12);
    for (double p : r.stationary) EXPECT_NEAR(p, 1.0 / 15.0, 1e-10);
  }
}

TEST(AnalyzeTest, ReducibleChainHasUnitLambda2) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  const SpectralReport r = Analyze(TransitionMatrix(m));
  EXPECT_FALSE(r.is_irreducible);
  EXPECT_NEAR(r.lambda2, 1.0, 1e-12);
}

TEST(HittingWeightsTest, TwoNodeGeometric) {
  const HittingWeights hw = ComputeHittingWeights(Uniform2(), 0, 1, 5);
  for (int t = 1; t <= 5; ++t) EXPECT_DOUBLE_EQ(hw.weights[t - 1], std::pow(0.5, t));
  EXPECT_DOUBLE_EQ(hw.residual, std::pow(0.5, 5));
}

TEST(HittingWeightsTest, UniformKernelIsFirstSuccessGeometric) {
  const int n = 6;
  const TransitionMatrix w(Eigen::MatrixXd::Constant(n, n, 1.0 / n));
  const HittingWeights hw = ComputeHittingWeights(w, 2, 4, 30);
  for (int t = 1; t <= 30; ++t) {
    EXPECT_NEAR(hw.weights[t - 1], (1.0 / n) * std::pow((n - 1.0) / n, t - 1), 1e-15);
  }
}

TEST(HittingWeightsTest, FirstReturnTime) {
  const HittingWeights hw = ComputeHittingWeights(Uniform2(), 0, 0, 4);
  for (int t = 1; t <= 4; ++t) EXPECT_DOUBLE_EQ(hw.weights[t - 1], std::pow(0.5, t));
}

TEST(HittingWeightsTest, UnreachableTarget) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m << 0.5, 0.5, 0, 0.5, 0.5, 0, 0, 0, 1;
  const HittingWeights hw = ComputeHittingWeights(TransitionMatrix(m), 0, 2, 10);
  for (double v : hw.weights) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(hw.residual, 1.0);
}

TEST(HittingWeightsTest, BadArguments) {
  EXPECT_THROW(ComputeHittingWeights(Uniform2(), 0, 1, 0), Error);
  EXPECT_THROW(ComputeHittingWeights(Uniform2(), 0, 2, 3), Error);
  EXPECT_THROW(ComputeHittingWeights(Uniform2(), -1, 1, 3), Error);
}

TEST(HittingWeightsTest, MatchesAbsorbingChainOracle) {
  const TransitionMatrix w = BuildTransition(graphs::RandomConnected(7, 0.4, 3),
                                             TransitionScheme::kLazySimpleWalk);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      if (i == j) continue;
      const HittingWeights hw = ComputeHittingWeights(w, i, j, 12);
      const auto oracle = AbsorbingOracle(w, i, j, 12);
      for (int t = 0; t < 12; ++t) EXPECT_NEAR(hw.weights[t], oracle[t], 1e-13);
      EXPECT_NEAR(hw.Total(), 1.0, 1e-12);
      for (double v : hw.weights) EXPECT_GE(v, 0.0);
      EXPECT_GE(hw.residual, 0.0);
    }
  }
}

TEST(HittingWeightsTest, TableAgreesWithSinglePair) {
  const TransitionMatrix w = BuildTransition(graphs::Hypercube(4),
                                             TransitionScheme::kMetropolisHastings);
  const auto table = HittingTable(w, 5, 40);
  for (int i = 0; i < w.n(); ++i) {
    const HittingWeights hw = ComputeHittingWeights(w, i, 5, 40);
    for (int t = 0; t < 40; ++t) EXPECT_EQ(table[t][i], hw.weights[t]);
  }
}

TEST(PowerWeightsTest, DominatesHittingWeights) {
  const TransitionMatrix w = BuildTransition(graphs::Ring(6),
                                             TransitionScheme::kMetropolisHastings);
  const HittingWeights hit = ComputeHittingWeights(w, 0, 3, 25);
  const HittingWeights pow = PowerWeights(w, 0, 3, 25);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(6, 6);
  for (int t = 0; t < 25; ++t) {
    p = p * w.dense();
    EXPECT_NEAR(pow.weights[t], p(0, 3), 1e-14);
    EXPECT_GE(pow.weights[t] + 1e-15, hit.weights[t]);
  }
  EXPECT_GE(pow.residual, 0.0);
}

double StandardError(double p, std::int64_t samples) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-300) / static_cast<double>(samples));
}

TEST(MonteCarloTest, TwoNodeWithinThreeStandardErrors) {
  const std::int64_t samples = 1000000;
  const HittingWeights mc = MonteCarloHittingWeights(Uniform2(), 0, 1, 10, samples, 42);
  for (int t = 1; t <= 10; ++t) {
    const double p = std::pow(0.5, t);
    EXPECT_LE(std::abs(mc.weights[t - 1] - p), 3.0 * StandardError(p, samples)) << "t=" << t;
  }
}

TEST(MonteCarloTest, DeterministicPermutationIsExact) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 1) = m(1, 2) = m(2, 3) = m(3, 0) = 1.0;
  const HittingWeights mc = MonteCarloHittingWeights(TransitionMatrix(m), 0, 3, 5, 1, 9);
  EXPECT_EQ(mc.weights, (std::vector<double>{0, 0, 1, 0, 0}));
  EXPECT_EQ(mc.residual, 0.0);
}

TEST(MonteCarloTest, SeedIsDeterministic) {
  const TransitionMatrix w = BuildTransition(graphs::Ring(5),
                                             TransitionScheme::kLazySimpleWalk);
  const HittingWeights a = MonteCarloHittingWeights(w, 0, 2, 8, 5000, 11);
  const HittingWeights b = MonteCarloHittingWeights(w, 0, 2, 8, 5000, 11);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.residual, b.residual);
}

TEST(FiedlerTest, SmallGraphs) {
  EXPECT_NEAR(LaplacianFiedler(graphs::Ring(4)), 2.0, 1e-12);
  EXPECT_NEAR(LaplacianFiedler(graphs::Complete(2)), 2.0, 1e-12);
  EXPECT_NEAR(LaplacianFiedler(graphs::Path(2)), 2.0, 1e-12);
  // Path P_n: 2 - 2 cos(pi / n).
  EXPECT_NEAR(LaplacianFiedler(graphs::Path(7)), 2.0 - 2.0 * std::cos(M_PI / 7.0), 1e-12);
}

TEST(FiedlerTest, DisconnectedIsError) {
  EXPECT_THROW(LaplacianFiedler(EdgeList(4, {{0, 1}, {2, 3}})), Error);
}

TEST(GraphFamiliesTest, SizesAndRegularity) {
  EXPECT_EQ(graphs::Hypercube(5).n, 32);
  EXPECT_EQ(graphs::Hypercube(5).edges.size(), 80u);
  const GraphSpec g = graphs::RandomRegular(64, 6, 3);
  for (const auto& row : g.Adjacency()) EXPECT_EQ(row.size(), 6u);
  EXPECT_TRUE(IsConnected(g));
}

}  // namespace
}  // namespace pnfdp
