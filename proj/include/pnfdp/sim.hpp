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

// Small-scale simulators for private decentralized training on logistic
// regression: a random-walk token with local noisy SGD steps, and parallel
// gossip SGD with pairwise-cancelling correlated noise (DecoR).

#ifndef PNFDP_SIM_HPP_
#define PNFDP_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pnfdp/graph_markov.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

struct UserShard {
  Eigen::MatrixXd features;  // one sample per row, ||x|| <= 1
  Eigen::VectorXd labels;    // +-1
};

struct Dataset {
  int dim = 0;
  std::vector<UserShard> users;
  Eigen::MatrixXd test_features;
  Eigen::VectorXd test_labels;
};

// Labels sign(<w*, x> + 0.1 noise) for unit-norm Gaussian features; each
// user's samples are split 80/20 into a local shard and a pooled test set.
inline Dataset SynthLogregData(int n_users, int per_user, int dim,
                               std::uint64_t seed) {
  Require(n_users >= 1 && per_user >= 2 && dim >= 1,
          "synthetic data needs n_users >= 1, per_user >= 2, dim >= 1");
  Rng rng(seed);
  Eigen::VectorXd truth(dim);
  for (int k = 0; k < dim; ++k) truth(k) = rng.Normal();
  truth.normalize();
  const int train = std::max(1, static_cast<int>(std::lround(0.8 * per_user)));
  const int test = per_user - train;
  Dataset data;
  data.dim = dim;
  data.test_features.resize(static_cast<Eigen::Index>(n_users) * test, dim);
  data.test_labels.resize(static_cast<Eigen::Index>(n_users) * test);
  auto draw = [&](Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> x) {
    for (int k = 0; k < dim; ++k) x(k) = rng.Normal();
    const double norm = x.norm();
    if (norm > 0.0) x /= norm;
    const double margin = x.dot(truth.transpose()) + 0.1 * rng.Normal();
    return margin >= 0.0 ? 1.0 : -1.0;
  };
  for (int u = 0; u < n_users; ++u) {
    UserShard shard;
    shard.features.resize(train, dim);
    shard.labels.resize(train);
    for (int s = 0; s < train; ++s) shard.labels(s) = draw(shard.features.row(s));
    for (int s = 0; s < test; ++s) {
      const Eigen::Index row = static_cast<Eigen::Index>(u) * test + s;
      data.test_labels(row) = draw(data.test_features.row(row));
    }
    data.users.push_back(std::move(shard));
  }
  return data;
}

// Mean logistic loss over all training shards plus (l2/2) ||theta||^2.
inline double LogisticObjective(const Dataset& data, const Eigen::VectorXd& theta,
                                double l2 = 0.0) {
  double total = 0.0;
  std::int64_t count = 0;
  for (const auto& shard : data.users) {
    const Eigen::VectorXd margins = shard.labels.cwiseProduct(shard.features * theta);
    for (Eigen::Index s = 0; s < margins.size(); ++s) {
      const double m = margins(s);
      total += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    count += margins.size();
  }
  return total / static_cast<double>(std::max<std::int64_t>(count, 1)) +
         0.5 * l2 * theta.squaredNorm();
}

inline double TestAccuracy(const Dataset& data, const Eigen::VectorXd& theta) {
  if (data.test_labels.size() == 0) return 0.0;
  const Eigen::VectorXd scores = data.test_features * theta;
  int correct = 0;
  for (Eigen::Index s = 0; s < scores.size(); ++s) {
    if ((scores(s) >= 0.0 ? 1.0 : -1.0) == data.test_labels(s)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

struct SimConfig {
  int T = 100;
  int K = 1;
  double eta = 0.1;
  double sigma = 0.0;      // random walk: per-step noise std
  double sigma_dp = 0.0;   // DecoR: independent noise std
  double sigma_cor = 0.0;  // DecoR: pairwise correlated noise std
  double clip = 1.0;
  int batch = 1;
  int start = 0;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  int checkpoint_every = 0;  // 0 records only the final state
  // Random walk: after this many visits a node only adds noise.
  std::optional<std::int64_t> cap;
  // Random walk: keep the visited nodes. DecoR: keep the network-mean iterate.
  bool record_trajectory = false;
};

struct RunMetrics {
  std::vector<int> rounds;
  std::vector<double> objective;
  std::vector<double> accuracy;
  std::vector<std::int64_t> visits;
  std::uint64_t params_hash = 0;
  Eigen::VectorXd final_params;
  // DecoR: largest |sum of injected correlated noise| over rounds.
  double max_correlated_sum = 0.0;
  std::vector<Eigen::VectorXd> mean_trajectory;
  std::vector<int> path;  // node holding the token in each round

  std::string ToCsv() const {
    std::ostringstream out;
    out.precision(17);
    out << "round,objective,accuracy\n";
    for (size_t k = 0; k < rounds.size(); ++k) {
      out << rounds[k] << ',' << objective[k] << ',' << accuracy[k] << '\n';
    }
    return out.str();
  }
};

namespace internal {

inline std::uint64_t HashParams(const Eigen::VectorXd& theta) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    unsigned char bytes[sizeof(double)];
    const double v = theta(k);
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

// Mean of per-sample logistic gradients clipped to `clip`, over a batch drawn
// without replacement.
inline Eigen::VectorXd ClippedBatchGradient(const UserShard& shard,
                                            const Eigen::VectorXd& theta,
                                            int batch, double clip, double l2,
                                            Rng& rng, std::vector<int>& scratch) {
  const int size = static_cast<int>(shard.labels.size());
  scratch.resize(size);
  std::iota(scratch.begin(), scratch.end(), 0);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  const int b = std::min(batch, size);
  for (int k = 0; k < b; ++k) {
    const int pick = k + static_cast<int>(rng.Uniform() * (size - k)) % (size - k);
    std::swap(scratch[k], scratch[pick]);
    const int s = scratch[k];
    const double y = shard.labels(s);
    const double m = y * shard.features.row(s).dot(theta);
    const double weight = -y / (1.0 + std::exp(m));
    Eigen::VectorXd gs = weight * shard.features.row(s).transpose() + l2 * theta;
    const double norm = gs.norm();
    if (norm > clip) gs *= clip / norm;
    g += gs;
  }
  return g / b;
}

inline void CheckShards(const Dataset& data, int n) {
  if (static_cast<int>(data.users.size()) != n) {
    Fail(ErrorCode::kInvalidArgument, "dataset must have one shard per node");
  }
  for (const auto& shard : data.users) {
    if (shard.labels.size() == 0) Fail(ErrorCode::kInvalidArgument, "empty user shard");
  }
}

inline void Checkpoint(RunMetrics& m, const Dataset& data,
                       const Eigen::VectorXd& theta, int round, double l2) {
  m.rounds.push_back(round);
  m.objective.push_back(LogisticObjective(data, theta, l2));
  m.accuracy.push_back(TestAccuracy(data, theta));
}

// Independent streams so that changing noise levels leaves batches and walk
// paths unchanged.
struct SimStreams {
  explicit SimStreams(std::uint64_t seed)
      : batches(seed), noise(seed ^ 0x9E3779B97F4A7C15ULL),
        walk(seed + 0xD1B54A32D192ED03ULL) {}
  Rng batches;
  Rng noise;
  Rng walk;
};

}  // namespace internal

// Random-walk DP-SGD: the token performs K clipped noisy steps at the current
// node, then moves to j ~ W_{i,.}.
inline RunMetrics RunWalkDpsgd(const SimConfig& cfg, const TransitionMatrix& w,
                               const Dataset& data) {
  const int n = w.n();
  internal::CheckShards(data, n);
  Require(cfg.T >= 1 && cfg.K >= 1 && cfg.batch >= 1, "T, K and batch must be >= 1");
  Require(cfg.start >= 0 && cfg.start < n, "start node outside [0, n)");
  Require(cfg.sigma >= 0.0 && cfg.clip > 0.0 && cfg.eta > 0.0,
          "need sigma >= 0, clip > 0, eta > 0");
  internal::SimStreams rng(cfg.seed);
  RunMetrics m;
  m.visits.assign(n, 0);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(data.dim);
  std::vector<int> scratch;
  int node = cfg.start;
  for (int t = 1; t <= cfg.T; ++t) {
    const bool capped = cfg.cap && m.visits[node] >= *cfg.cap;
    for (int k = 0; k < cfg.K; ++k) {
      Eigen::VectorXd step = Eigen::VectorXd::Zero(data.dim);
      if (!capped) {
        step = internal::ClippedBatchGradient(data.users[node], theta, cfg.batch,
                                              cfg.clip, cfg.l2, rng.batches, scratch);
      }
      for (int d = 0; d < data.dim; ++d) step(d) += cfg.sigma * rng.noise.Normal();
      theta -= cfg.eta * step;
    }
    ++m.visits[node];
    if (cfg.record_trajectory) m.path.push_back(node);
    const auto& row = w.Row(node);
    double u = rng.walk.Uniform();
    int next = row.back().first;
    for (const auto& [col, prob] : row) {
      if (u < prob) {
        next = col;
        break;
      }
      u -= prob;
    }
    node = next;
    if ((cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0) || t == cfg.T) {
      if (m.rounds.empty() || m.rounds.back() != t) {
        internal::Checkpoint(m, data, theta, t, cfg.l2);
      }
    }
  }
  m.final_params = theta;
  m.params_hash = internal::HashParams(theta);
  return m;
}

// DecoR: every node takes one noisy step with pairwise correlated noise
// Z_ij = -Z_ji plus independent noise, then averages with its neighbours.
inline RunMetrics RunDecor(const SimConfig& cfg, const TransitionMatrix& w,
                           const Dataset& data) {
  const int n = w.n();
  internal::CheckShards(data, n);
  Require(cfg.T >= 1 && cfg.batch >= 1, "T and batch must be >= 1");
  Require(cfg.sigma_dp >= 0.0 && cfg.sigma_cor >= 0.0 && cfg.clip > 0.0 && cfg.eta > 0.0,
          "need non-negative noise, clip > 0, eta > 0");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, v] : w.Row(i)) {
      if (j > i) edges.emplace_back(i, j);
    }
  }
  internal::SimStreams rng(cfg.seed);
  RunMetrics m;
  m.visits.assign(n, cfg.T);
  const int d = data.dim;
  std::vector<Eigen::VectorXd> theta(n, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::VectorXd> half(n, Eigen::VectorXd::Zero(d));
  std::vector<Eigen::VectorXd> corr(n, Eigen::VectorXd::Zero(d));
  std::vector<int> scratch;
  auto network_mean = [&]() {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& th : theta) mean += th;
    return Eigen::VectorXd(mean / n);
  };
  for (int t = 1; t <= cfg.T; ++t) {
    for (auto& c : corr) c.setZero();
    for (const auto& [i, j] : edges) {
      for (int k = 0; k < d; ++k) {
        const double z = cfg.sigma_cor * rng.noise.Normal();
        corr[i](k) += z;
        corr[j](k) -= z;
      }
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
    for (const auto& c : corr) total += c;
    m.max_correlated_sum = std::max(m.max_correlated_sum, total.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd g = internal::ClippedBatchGradient(
          data.users[i], theta[i], cfg.batch, cfg.clip, cfg.l2, rng.batches, scratch);
      g += corr[i];
      for (int k = 0; k < d; ++k) g(k) += cfg.sigma_dp * rng.noise.Normal();
      half[i] = theta[i] - cfg.eta * g;
    }
    for (int i = 0; i < n; ++i) {
      theta[i].setZero();
      for (const auto& [j, v] : w.Row(i)) theta[i] += v * half[j];
    }
    if (cfg.record_trajectory) m.mean_trajectory.push_back(network_mean());
    if ((cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0) || t == cfg.T) {
      if (m.rounds.empty() || m.rounds.back() != t) {
        internal::Checkpoint(m, data, network_mean(), t, cfg.l2);
      }
    }
  }
  m.final_params = network_mean();
  m.params_hash = internal::HashParams(m.final_params);
  return m;
}

}  // namespace pnfdp

#endif  // PNFDP_SIM_HPP_
