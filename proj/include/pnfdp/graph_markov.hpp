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

// Communication graphs, random-walk transition matrices, spectral
// diagnostics, and first-visit (hitting time) distributions.

#ifndef PNFDP_GRAPH_MARKOV_HPP_
#define PNFDP_GRAPH_MARKOV_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pnfdp/status.hpp"

namespace pnfdp {

using Edge = std::pair<int, int>;

struct GraphSpec {
  int n = 0;
  std::vector<Edge> edges;
  // Dense rows, only used by the explicit scheme.
  std::optional<std::vector<std::vector<double>>> matrix;

  void Validate() const {
    if (n <= 0) Fail(ErrorCode::kInvalidArgument, "graph: n must be positive");
    std::set<Edge> seen;
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n) {
        Fail(ErrorCode::kInvalidArgument,
             "graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                 ") has an index outside [0, n)");
      }
      if (a == b) {
        Fail(ErrorCode::kInvalidArgument,
             "graph: self-loop edge at node " + std::to_string(a));
      }
      if (!seen.insert(std::minmax(a, b)).second) {
        Fail(ErrorCode::kInvalidArgument,
             "graph: duplicate edge (" + std::to_string(a) + "," +
                 std::to_string(b) + ")");
      }
    }
    if (matrix.has_value()) {
      if (static_cast<int>(matrix->size()) != n) {
        Fail(ErrorCode::kFormat, "graph: explicit matrix must have n rows");
      }
      for (const auto& row : *matrix) {
        if (static_cast<int>(row.size()) != n) {
          Fail(ErrorCode::kFormat, "graph: explicit matrix must be n x n");
        }
      }
    }
  }

  std::vector<std::vector<int>> Adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
  }
};

// Breadth-first reachability over an adjacency list.
inline bool IsConnected(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int count = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == n;
}

inline bool IsConnected(const GraphSpec& spec) {
  return IsConnected(spec.Adjacency());
}

enum class TransitionScheme { kMetropolisHastings, kLazySimpleWalk, kExplicit };

inline TransitionScheme ParseTransitionScheme(std::string_view name) {
  if (name == "metropolis_hastings") return TransitionScheme::kMetropolisHastings;
  if (name == "lazy_simple_walk") return TransitionScheme::kLazySimpleWalk;
  if (name == "explicit") return TransitionScheme::kExplicit;
  Fail(ErrorCode::kInvalidArgument,
       "unknown transition scheme '" + std::string(name) + "'");
}

inline std::string_view TransitionSchemeName(TransitionScheme scheme) {
  switch (scheme) {
    case TransitionScheme::kMetropolisHastings:
      return "metropolis_hastings";
    case TransitionScheme::kLazySimpleWalk:
      return "lazy_simple_walk";
    case TransitionScheme::kExplicit:
      return "explicit";
  }
  return "explicit";
}

// Row-stochastic n x n kernel. Immutable after construction.
class TransitionMatrix {
 public:
  static constexpr double kRowTolerance = 1e-12;
  // Hand-written matrices in files rarely sum to 1 within 1e-12.
  static constexpr double kInputRowTolerance = 1e-9;

  TransitionMatrix() = default;

  explicit TransitionMatrix(Eigen::MatrixXd dense,
                            double row_tolerance = kRowTolerance)
      : dense_(std::move(dense)) {
    if (dense_.rows() != dense_.cols() || dense_.rows() == 0) {
      Fail(ErrorCode::kFormat, "transition matrix must be square and nonempty");
    }
    for (Eigen::Index i = 0; i < dense_.rows(); ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < dense_.cols(); ++j) {
        const double w = dense_(i, j);
        if (!(w >= 0.0 && w <= 1.0)) {
          Fail(ErrorCode::kFormat, "transition matrix entry (" +
                                       std::to_string(i) + "," +
                                       std::to_string(j) + ") not in [0,1]");
        }
        sum += w;
      }
      if (std::abs(sum - 1.0) > row_tolerance) {
        Fail(ErrorCode::kFormat, "transition matrix row " + std::to_string(i) +
                                     " sums to " + std::to_string(sum));
      }
    }
    BuildSupport();
  }

  int n() const { return static_cast<int>(dense_.rows()); }
  double operator()(int i, int j) const { return dense_(i, j); }
  const Eigen::MatrixXd& dense() const { return dense_; }

  // Nonzero (column, weight) pairs of row i.
  const std::vector<std::pair<int, double>>& Row(int i) const {
    return rows_[i];
  }

  bool IsSymmetric(double tol = 1e-12) const {
    return (dense_ - dense_.transpose()).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  void BuildSupport() {
    rows_.assign(n(), {});
    for (int i = 0; i < n(); ++i) {
      for (int j = 0; j < n(); ++j) {
        if (dense_(i, j) > 0.0) rows_[i].emplace_back(j, dense_(i, j));
      }
    }
  }

  Eigen::MatrixXd dense_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

// Builds W from a graph. The two built-in schemes give symmetric kernels:
//   metropolis_hastings: W_ij = min(1/(d_i+1), 1/(d_j+1)), remainder on W_ii.
//   lazy_simple_walk:    W_ij = 1/(2 d_i), W_ii = 1/2.
inline TransitionMatrix BuildTransition(const GraphSpec& spec,
                                        TransitionScheme scheme) {
  spec.Validate();
  const int n = spec.n;
  if (scheme == TransitionScheme::kExplicit) {
    if (!spec.matrix.has_value()) {
      Fail(ErrorCode::kInvalidArgument,
           "explicit scheme requires matrix rows in the graph spec");
    }
    Eigen::MatrixXd dense(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) dense(i, j) = (*spec.matrix)[i][j];
    }
    TransitionMatrix w(std::move(dense), TransitionMatrix::kInputRowTolerance);
    if (!spec.edges.empty()) {
      std::set<Edge> allowed(spec.edges.begin(), spec.edges.end());
      for (int i = 0; i < n; ++i) {
        for (const auto& [j, v] : w.Row(i)) {
          if (i != j && !allowed.count({i, j}) && !allowed.count({j, i})) {
            Fail(ErrorCode::kFormat, "explicit matrix has mass on non-edge (" +
                                         std::to_string(i) + "," +
                                         std::to_string(j) + ")");
          }
        }
      }
    }
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
      for (const auto& [j, v] : w.Row(i)) {
        if (j != i) {
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      }
    }
    if (!IsConnected(adj)) {
      Fail(ErrorCode::kValidation, "explicit matrix support is disconnected");
    }
    return w;
  }

  const auto adj = spec.Adjacency();
  if (!IsConnected(adj)) {
    Fail(ErrorCode::kValidation, "communication graph is disconnected");
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double di = static_cast<double>(adj[i].size());
    for (int j : adj[i]) {
      const double dj = static_cast<double>(adj[j].size());
      dense(i, j) = scheme == TransitionScheme::kMetropolisHastings
                        ? std::min(1.0 / (di + 1.0), 1.0 / (dj + 1.0))
                        : 1.0 / (2.0 * di);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (scheme == TransitionScheme::kLazySimpleWalk) {
      dense(i, i) = n == 1 ? 1.0 : 0.5;
    } else {
      double off = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) off += dense(i, j);
      }
      dense(i, i) = 1.0 - off;
    }
  }
  return TransitionMatrix(std::move(dense));
}

struct SpectralReport {
  double lambda2 = 0.0;
  double spectral_gap = 0.0;
  bool is_irreducible = false;
  bool is_aperiodic = false;
  bool is_symmetric = false;
  std::vector<double> stationary;
  std::vector<double> eigenvalues;  // descending
};

namespace internal {

inline std::vector<std::vector<int>> SupportLists(const TransitionMatrix& w) {
  std::vector<std::vector<int>> out(w.n());
  for (int i = 0; i < w.n(); ++i) {
    for (const auto& [j, v] : w.Row(i)) out[i].push_back(j);
  }
  return out;
}

inline bool IsStronglyConnected(const TransitionMatrix& w) {
  const int n = w.n();
  const auto fwd = SupportLists(w);
  std::vector<std::vector<int>> bwd(n);
  for (int i = 0; i < n; ++i) {
    for (int j : fwd[i]) bwd[j].push_back(i);
  }
  auto reaches_all = [n](const std::vector<std::vector<int>>& g) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : g[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(bwd);
}

// gcd{t <= 2n : (W^t)_ii > 0} for every node; aperiodic iff all equal 1.
inline bool IsAperiodic(const TransitionMatrix& w) {
  const int n = w.n();
  bool all_loops = true;
  for (int i = 0; i < n; ++i) all_loops &= w(i, i) > 0.0;
  if (all_loops) return true;
  const auto fwd = SupportLists(w);
  for (int i = 0; i < n; ++i) {
    if (w(i, i) > 0.0) continue;
    int g = 0;
    std::vector<char> frontier(n, 0), next(n, 0);
    frontier[i] = 1;
    for (int t = 1; t <= 2 * n && g != 1; ++t) {
      std::fill(next.begin(), next.end(), 0);
      for (int u = 0; u < n; ++u) {
        if (!frontier[u]) continue;
        for (int v : fwd[u]) next[v] = 1;
      }
      frontier.swap(next);
      if (frontier[i]) g = std::gcd(g, t);
    }
    if (g != 1) return false;
  }
  return true;
}

}  // namespace internal

// Spectral and ergodicity diagnostics. Asymmetric kernels are rejected unless
// `allow_asymmetric`, in which case the eigenvalues are those of (W+W^T)/2.
inline SpectralReport Analyze(const TransitionMatrix& w,
                              bool allow_asymmetric = false) {
  SpectralReport report;
  report.is_symmetric = w.IsSymmetric();
  if (!report.is_symmetric && !allow_asymmetric) {
    Fail(ErrorCode::kValidation,
         "transition matrix is not symmetric; spectral analysis requires "
         "W = W^T");
  }
  const Eigen::MatrixXd sym = 0.5 * (w.dense() + w.dense().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const int n = w.n();
  report.eigenvalues.resize(n);
  for (int k = 0; k < n; ++k) report.eigenvalues[k] = ev(n - 1 - k);
  report.lambda2 = n >= 2 ? report.eigenvalues[1] : 0.0;
  report.spectral_gap = 1.0 - report.lambda2;
  report.is_irreducible = internal::IsStronglyConnected(w);
  report.is_aperiodic = internal::IsAperiodic(w);

  // Left eigenvector for eigenvalue 1.
  Eigen::EigenSolver<Eigen::MatrixXd> general(w.dense().transpose());
  Eigen::Index best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < general.eigenvalues().size(); ++k) {
    const double d = std::abs(general.eigenvalues()(k) - 1.0);
    if (d < best_gap) {
      best_gap = d;
      best = k;
    }
  }
  Eigen::VectorXd pi = general.eigenvectors().col(best).real();
  const double total = pi.sum();
  report.stationary.resize(n);
  for (int k = 0; k < n; ++k) report.stationary[k] = pi(k) / total;
  return report;
}

// Hitting-time law of a walk from `source` to `target`:
// weights[t-1] = P[tau = t] for t = 1..horizon, residual = P[tau > horizon].
struct HittingWeights {
  int source = 0;
  int target = 0;
  int horizon = 0;
  std::vector<double> weights;
  double residual = 1.0;

  double Total() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0) + residual;
  }
};

namespace internal {

inline void CheckHittingArgs(const TransitionMatrix& w, int i, int j, int T) {
  if (T < 1) Fail(ErrorCode::kInvalidArgument, "horizon T must be >= 1");
  if (i < 0 || i >= w.n() || j < 0 || j >= w.n()) {
    Fail(ErrorCode::kInvalidArgument, "node index outside [0, n)");
  }
}

inline double ResidualOf(const std::vector<double>& weights) {
  long double sum = 0.0L;
  for (double v : weights) sum += v;
  const double r = static_cast<double>(1.0L - sum);
  return r > 0.0 ? r : 0.0;
}

}  // namespace internal

// First-visit probabilities into `target` for every source at once,
// table[t-1][k] = P[tau_{k,target} = t]. Uses
// w_kj^t = sum_{l != j} W_kl w_lj^{t-1}, w_kj^1 = W_kj.
inline std::vector<std::vector<double>> HittingTable(const TransitionMatrix& w,
                                                     int target, int T) {
  internal::CheckHittingArgs(w, 0, target, T);
  const int n = w.n();
  std::vector<std::vector<double>> table(T, std::vector<double>(n, 0.0));
  for (int k = 0; k < n; ++k) table[0][k] = w(k, target);
  for (int t = 1; t < T; ++t) {
    const auto& prev = table[t - 1];
    auto& cur = table[t];
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (const auto& [l, wkl] : w.Row(k)) {
        if (l != target) acc += wkl * prev[l];
      }
      cur[k] = acc;
    }
  }
  return table;
}

inline HittingWeights ComputeHittingWeights(const TransitionMatrix& w, int i,
                                            int j, int T) {
  internal::CheckHittingArgs(w, i, j, T);
  const auto table = HittingTable(w, j, T);
  HittingWeights hw{i, j, T, std::vector<double>(T), 0.0};
  for (int t = 0; t < T; ++t) hw.weights[t] = table[t][i];
  hw.residual = internal::ResidualOf(hw.weights);
  return hw;
}

// Walk-matrix weights (W^t)_ij, t = 1..T. These need not sum to <= 1; the
// residual is clamped at zero.
inline HittingWeights PowerWeights(const TransitionMatrix& w, int i, int j,
                                   int T) {
  internal::CheckHittingArgs(w, i, j, T);
  const int n = w.n();
  std::vector<double> row(n, 0.0), next(n, 0.0);
  row[i] = 1.0;
  HittingWeights hw{i, j, T, std::vector<double>(T), 0.0};
  for (int t = 0; t < T; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int k = 0; k < n; ++k) {
      if (row[k] == 0.0) continue;
      for (const auto& [l, wkl] : w.Row(k)) next[l] += row[k] * wkl;
    }
    row.swap(next);
    hw.weights[t] = row[j];
  }
  hw.residual = internal::ResidualOf(hw.weights);
  return hw;
}

// Deterministic 64-bit generator shared by the Monte Carlo utilities; doubles
// are built from the top 53 bits so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  // Standard normal draw (Box-Muller, second value cached).
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = Uniform();
    while (u <= 0.0) u = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * Uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Empirical first-visit histogram over `samples` independent walks from i.
inline HittingWeights MonteCarloHittingWeights(const TransitionMatrix& w, int i,
                                               int j, int T,
                                               std::int64_t samples,
                                               std::uint64_t seed) {
  internal::CheckHittingArgs(w, i, j, T);
  if (samples < 1) Fail(ErrorCode::kInvalidArgument, "samples must be >= 1");
  const int n = w.n();
  std::vector<std::vector<double>> cumulative(n);
  std::vector<std::vector<int>> columns(n);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (const auto& [l, v] : w.Row(k)) {
      acc += v;
      cumulative[k].push_back(acc);
      columns[k].push_back(l);
    }
  }
  Rng rng(seed);
  std::vector<std::int64_t> counts(T, 0);
  for (std::int64_t s = 0; s < samples; ++s) {
    int node = i;
    for (int t = 1; t <= T; ++t) {
      const auto& cum = cumulative[node];
      const double u = rng.Uniform() * cum.back();
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      if (it == cum.end()) --it;
      node = columns[node][it - cum.begin()];
      if (node == j) {
        ++counts[t - 1];
        break;
      }
    }
  }
  HittingWeights hw{i, j, T, std::vector<double>(T), 0.0};
  std::int64_t hit = 0;
  for (int t = 0; t < T; ++t) {
    hw.weights[t] = static_cast<double>(counts[t]) / static_cast<double>(samples);
    hit += counts[t];
  }
  hw.residual = static_cast<double>(samples - hit) / static_cast<double>(samples);
  return hw;
}

// Smallest nonzero eigenvalue of the combinatorial Laplacian D - A.
inline double LaplacianFiedler(const GraphSpec& spec) {
  spec.Validate();
  if (spec.n < 2) Fail(ErrorCode::kInvalidArgument, "Fiedler value needs n >= 2");
  const auto adj = spec.Adjacency();
  if (!IsConnected(adj)) {
    Fail(ErrorCode::kValidation,
         "graph is disconnected; its Fiedler value is 0");
  }
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (const auto& [a, b] : spec.edges) {
    lap(a, b) -= 1.0;
    lap(b, a) -= 1.0;
    lap(a, a) += 1.0;
    lap(b, b) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap,
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);
}

}  // namespace pnfdp

#endif  // PNFDP_GRAPH_MARKOV_HPP_
