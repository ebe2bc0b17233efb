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

// Standard topologies used by the experiments and tests.

#ifndef PNFDP_GRAPHS_HPP_
#define PNFDP_GRAPHS_HPP_

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "pnfdp/graph_markov.hpp"

namespace pnfdp::graphs {

inline GraphSpec Ring(int n) {
  Require(n >= 3, "ring needs n >= 3");
  GraphSpec g{n, {}, std::nullopt};
  for (int i = 0; i < n; ++i) g.edges.emplace_back(i, (i + 1) % n);
  return g;
}

inline GraphSpec Path(int n) {
  Require(n >= 2, "path needs n >= 2");
  GraphSpec g{n, {}, std::nullopt};
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

inline GraphSpec Complete(int n) {
  Require(n >= 2, "complete graph needs n >= 2");
  GraphSpec g{n, {}, std::nullopt};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
  }
  return g;
}

// Nodes are bit strings of length `dim`; edges join strings at Hamming
// distance one.
inline GraphSpec Hypercube(int dim) {
  Require(dim >= 1 && dim <= 20, "hypercube dimension must be in [1, 20]");
  const int n = 1 << dim;
  GraphSpec g{n, {}, std::nullopt};
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < dim; ++b) {
      const int j = i ^ (1 << b);
      if (i < j) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

// Periodic rows x cols grid.
inline GraphSpec Torus(int rows, int cols) {
  Require(rows >= 3 && cols >= 3, "torus needs at least 3 x 3");
  GraphSpec g{rows * cols, {}, std::nullopt};
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      g.edges.emplace_back(id(r, c), id(r, (c + 1) % cols));
      g.edges.emplace_back(id(r, c), id((r + 1) % rows, c));
    }
  }
  return g;
}

// Uniform random d-regular simple graph via the pairing model with restarts;
// retries until the result is connected.
inline GraphSpec RandomRegular(int n, int degree, std::uint64_t seed) {
  Require(n > degree && degree >= 1, "random regular graph needs n > degree");
  Require((static_cast<long>(n) * degree) % 2 == 0, "n * degree must be even");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<size_t>(n) * degree);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < degree; ++d) stubs.push_back(i);
    }
    std::set<Edge> edges;
    bool ok = true;
    // Sequential stub matching; restart on self-loops or multi-edges.
    while (!stubs.empty() && ok) {
      const size_t m = stubs.size();
      const size_t a = static_cast<size_t>(rng.Uniform() * m) % m;
      std::swap(stubs[a], stubs[m - 1]);
      const int u = stubs.back();
      stubs.pop_back();
      bool placed = false;
      for (int tries = 0; tries < 64 && !placed; ++tries) {
        const size_t k = static_cast<size_t>(rng.Uniform() * (m - 1)) % (m - 1);
        const int v = stubs[k];
        if (v == u || edges.count(std::minmax(u, v))) continue;
        edges.insert(std::minmax(u, v));
        std::swap(stubs[k], stubs.back());
        stubs.pop_back();
        placed = true;
      }
      ok = placed;
    }
    if (!ok) continue;
    GraphSpec g{n, std::vector<Edge>(edges.begin(), edges.end()), std::nullopt};
    if (IsConnected(g)) return g;
  }
  Fail(ErrorCode::kNumeric, "failed to sample a connected regular graph");
}

// Erdos-Renyi G(n, p), resampled until connected.
inline GraphSpec RandomConnected(int n, double p, std::uint64_t seed) {
  Require(n >= 2 && p > 0.0 && p <= 1.0, "random graph needs n >= 2, p in (0,1]");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    GraphSpec g{n, {}, std::nullopt};
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.Uniform() < p) g.edges.emplace_back(i, j);
      }
    }
    if (IsConnected(g)) return g;
  }
  Fail(ErrorCode::kNumeric, "failed to sample a connected random graph");
}

}  // namespace pnfdp::graphs

#endif  // PNFDP_GRAPHS_HPP_
