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

// JSON and CSV surfaces: graph files, accounting configs and reports.
//
// A graph file holds either an explicit edge list
//   {"n": 4, "edges": [[0, 1], [1, 2]], "matrix": [[...], ...]}
// ("matrix" optional) or a named family
//   {"family": "hypercube", "dim": 5}
//   {"family": "random_regular", "n": 256, "degree": 10, "seed": 1}
// with families ring, path, complete, hypercube, torus, random_regular,
// random.

#ifndef PNFDP_IO_HPP_
#define PNFDP_IO_HPP_

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pnfdp/accountant.hpp"
#include "pnfdp/graph_markov.hpp"
#include "pnfdp/graphs.hpp"
#include "pnfdp/status.hpp"
#include "pnfdp/tradeoff.hpp"

namespace pnfdp {

using Json = nlohmann::json;

inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kFormat, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kFormat, "malformed JSON in " + path + ": " + e.what());
  }
}

inline GraphSpec GraphFromJson(const Json& j) {
  try {
    if (j.contains("family")) {
      const std::string family = j.at("family").get<std::string>();
      if (family == "ring") return graphs::Ring(j.at("n").get<int>());
      if (family == "path") return graphs::Path(j.at("n").get<int>());
      if (family == "complete") return graphs::Complete(j.at("n").get<int>());
      if (family == "hypercube") return graphs::Hypercube(j.at("dim").get<int>());
      if (family == "torus") {
        return graphs::Torus(j.at("rows").get<int>(), j.at("cols").get<int>());
      }
      if (family == "random_regular") {
        return graphs::RandomRegular(j.at("n").get<int>(), j.at("degree").get<int>(),
                                     j.value("seed", std::uint64_t{0}));
      }
      if (family == "random") {
        return graphs::RandomConnected(j.at("n").get<int>(), j.at("p").get<double>(),
                                       j.value("seed", std::uint64_t{0}));
      }
      Fail(ErrorCode::kFormat, "unknown graph family '" + family + "'");
    }
    GraphSpec g;
    g.n = j.at("n").get<int>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) Fail(ErrorCode::kFormat, "edges must be pairs");
      g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    if (j.contains("matrix")) {
      g.matrix = j.at("matrix").get<std::vector<std::vector<double>>>();
    }
    g.Validate();
    return g;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad graph description: ") + e.what());
  }
}

inline GraphSpec LoadGraph(const std::string& path) {
  return GraphFromJson(ReadJsonFile(path));
}

inline Json GraphToJson(const GraphSpec& g) {
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  return {{"n", g.n}, {"edges", edges}};
}

inline Json ToJson(const SpectralReport& r) {
  return {{"lambda2", r.lambda2},
          {"spectral_gap", r.spectral_gap},
          {"is_irreducible", r.is_irreducible},
          {"is_aperiodic", r.is_aperiodic},
          {"is_symmetric", r.is_symmetric},
          {"stationary", r.stationary},
          {"eigenvalues", r.eigenvalues}};
}

inline Json ToJson(const BudgetReport& r) {
  return {{"i", r.source},
          {"j", r.target},
          {"epsilon", r.epsilon},
          {"count", r.count},
          {"zeta", r.zeta},
          {"delta_prime", r.delta_prime},
          {"delta_conversion", r.delta_conversion},
          {"delta_trunc", r.delta_trunc},
          {"lambda2", r.lambda2},
          {"residual", r.residual},
          {"coarsenings", r.coarsenings}};
}

inline Json ToJson(const AccountingConfig& c) {
  Json j = {{"T", c.T},
            {"K", c.amp.K},
            {"eta", c.amp.eta},
            {"Delta", c.amp.Delta},
            {"sigma", c.amp.sigma},
            {"delta", c.delta},
            {"delta_split", c.conversion_fraction},
            {"level", c.level == PrivacyLevel::kUser ? "user" : "record"},
            {"cap_contributions", c.cap_contributions},
            {"gamma_policy",
             c.gamma_policy == GammaPolicy::kAllOnes ? "all_ones" : "grid_search"},
            {"literal_eta_scaling", c.amp.literal_eta_scaling},
            {"h", c.discretize.h},
            {"tail_budget", c.discretize.tail_budget},
            {"mu_resolution", c.discretize.mu_resolution}};
  if (c.amp.convexity) {
    j["strongly_convex"] = {c.amp.convexity->m, c.amp.convexity->M};
  } else {
    j["strongly_convex"] = nullptr;
  }
  if (c.amp.record) {
    j["batch"] = c.amp.record->batch;
    j["local_size"] = c.amp.record->local_size;
  }
  return j;
}

// Overlays keys of `j` (same names as ToJson) onto `base`.
inline AccountingConfig ConfigFromJson(const Json& j, AccountingConfig base = {}) {
  try {
    if (j.contains("T")) base.T = j.at("T").get<int>();
    if (j.contains("K")) base.amp.K = j.at("K").get<int>();
    if (j.contains("eta")) base.amp.eta = j.at("eta").get<double>();
    if (j.contains("Delta")) base.amp.Delta = j.at("Delta").get<double>();
    if (j.contains("sigma")) base.amp.sigma = j.at("sigma").get<double>();
    if (j.contains("delta")) base.delta = j.at("delta").get<double>();
    if (j.contains("delta_split")) base.conversion_fraction = j.at("delta_split").get<double>();
    if (j.contains("level")) {
      const std::string level = j.at("level").get<std::string>();
      if (level != "user" && level != "record") {
        Fail(ErrorCode::kFormat, "level must be 'user' or 'record'");
      }
      base.level = level == "user" ? PrivacyLevel::kUser : PrivacyLevel::kRecord;
    }
    if (j.contains("cap_contributions")) {
      base.cap_contributions = j.at("cap_contributions").get<bool>();
    }
    if (j.contains("gamma_policy")) {
      const std::string g = j.at("gamma_policy").get<std::string>();
      if (g != "all_ones" && g != "grid_search") {
        Fail(ErrorCode::kFormat, "gamma_policy must be 'all_ones' or 'grid_search'");
      }
      base.gamma_policy = g == "all_ones" ? GammaPolicy::kAllOnes : GammaPolicy::kGridSearch;
    }
    if (j.contains("literal_eta_scaling")) {
      base.amp.literal_eta_scaling = j.at("literal_eta_scaling").get<bool>();
    }
    if (j.contains("h")) base.discretize.h = j.at("h").get<double>();
    if (j.contains("tail_budget")) base.discretize.tail_budget = j.at("tail_budget").get<double>();
    if (j.contains("mu_resolution")) {
      base.discretize.mu_resolution = j.at("mu_resolution").get<double>();
    }
    if (j.contains("strongly_convex") && !j.at("strongly_convex").is_null()) {
      const auto& sc = j.at("strongly_convex");
      base.amp.convexity = StronglyConvex{sc.at(0).get<double>(), sc.at(1).get<double>()};
    }
    if (j.contains("batch") || j.contains("local_size")) {
      RecordSampling r = base.amp.record.value_or(RecordSampling{});
      if (j.contains("batch")) r.batch = j.at("batch").get<int>();
      if (j.contains("local_size")) r.local_size = j.at("local_size").get<int>();
      base.amp.record = r;
    }
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad accounting config: ") + e.what());
  }
  return base;
}

inline std::string HittingWeightsCsv(const HittingWeights& hw) {
  std::ostringstream out;
  out.precision(17);
  out << "t,weight\n";
  for (size_t t = 0; t < hw.weights.size(); ++t) out << t + 1 << ',' << hw.weights[t] << '\n';
  out << "residual," << hw.residual << '\n';
  return out.str();
}

// n x n epsilon matrix; the diagonal is left empty.
inline std::string EpsilonMatrixCsv(const std::vector<std::vector<BudgetReport>>& m) {
  std::ostringstream out;
  out.precision(17);
  const size_t n = m.size();
  out << "i";
  for (size_t j = 0; j < n; ++j) out << ",j" << j;
  out << '\n';
  for (size_t i = 0; i < n; ++i) {
    out << i;
    for (size_t j = 0; j < n; ++j) {
      out << ',';
      if (m[i][j].applicable) out << m[i][j].epsilon;
    }
    out << '\n';
  }
  return out.str();
}

inline std::string CurveCsv(const TradeoffCurve& curve) {
  std::ostringstream out;
  out.precision(17);
  out << "alpha,beta\n";
  for (const Knot& k : KnotsOf(curve)) out << k.alpha << ',' << k.value << '\n';
  return out.str();
}

}  // namespace pnfdp

#endif  // PNFDP_IO_HPP_
