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

// Command-line front end. `RunCli` returns the process exit status:
// 0 on success, 2 on usage errors, 1 on failures (with a JSON error object on
// the error stream).

#ifndef PNFDP_CLI_HPP_
#define PNFDP_CLI_HPP_

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pnfdp/accountant.hpp"
#include "pnfdp/io.hpp"
#include "pnfdp/rdp.hpp"
#include "pnfdp/secldp.hpp"
#include "pnfdp/sim.hpp"

namespace pnfdp {

namespace cli {

struct Options {
  std::string config;
  std::string graph;
  std::string scheme = "mh";
  std::string out;
  int T = 1;
  int K = 1;
  double eta = 0.1;
  double Delta = 1.0;
  double sigma = 1.0;
  double delta = 1e-5;
  double delta_split = 0.5;
  std::string level = "user";
  int batch = 1;
  int local_size = 1;
  std::vector<double> strongly_convex;
  bool cap = false;
  std::uint64_t seed = 0;
  int i = 0;
  int j = 1;
  double epsilon = 0.0;
  std::string gamma_policy = "all_ones";
  std::string weighting = "hitting";
  double h = 1e-4;
  double mu_resolution = 1e-3;
  bool literal_eta = false;
  // secldp
  int q = 0;
  double sigma_dp = 1.0;
  double sigma_cor = 0.0;
  int rounds = 1;
  double cor_ratio = -1.0;
  // simulate
  std::string algorithm = "walk";
  int per_user = 64;
  int dim = 10;
  int checkpoint_every = 0;
  double l2 = 0.0;
};

// Tracks which options the parsed subcommand received explicitly.
struct Flags {
  const CLI::App* active = nullptr;
  bool given(const std::string& name) const {
    const CLI::Option* o = active == nullptr ? nullptr : active->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  }
};

inline void AddAccountingFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON accounting config");
  cmd->add_option("--T", o.T, "Number of walk rounds");
  cmd->add_option("--K", o.K, "Local steps per visit");
  cmd->add_option("--eta", o.eta, "Step size");
  cmd->add_option("--Delta", o.Delta, "Gradient sensitivity");
  cmd->add_option("--sigma", o.sigma, "Noise std per step");
  cmd->add_option("--delta", o.delta, "Target delta");
  cmd->add_option("--delta-split", o.delta_split,
      "Share of delta spent on the PRV conversion");
  cmd->add_option("--level", o.level, "user or record")
      ->check(CLI::IsMember({"user", "record"}));
  cmd->add_option("--batch", o.batch, "Record-level batch size");
  cmd->add_option("--local-size", o.local_size, "Samples per user");
  cmd->add_option("--strongly-convex", o.strongly_convex, "Strong convexity and smoothness m M")
      ->expected(2);
  cmd->add_flag("--cap-contributions", o.cap,
      "Stop counting visits beyond the bound");
  cmd->add_option("--gamma-policy", o.gamma_policy, "all_ones or grid_search")
      ->check(CLI::IsMember({"all_ones", "grid_search"}));
  cmd->add_option("--h", o.h, "PRV lattice spacing");
  cmd->add_option("--mu-resolution", o.mu_resolution,
                  "Relative grid for merging mixture components (0 = exact)");
  cmd->add_flag("--literal-eta-scaling", o.literal_eta,
      "Non-convex record level: scale by Delta/(eta sigma)");
}

inline void AddGraphFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--graph", o.graph, "Graph JSON file")->required();
  cmd->add_option("--scheme", o.scheme, "mh, lazy or explicit")
      ->check(CLI::IsMember(
          {"mh", "lazy", "explicit", "metropolis_hastings", "lazy_simple_walk"}));
}

inline void AddOutFlag(CLI::App* cmd, Options& o) {
  cmd->add_option("--out", o.out, "Write CSV output to this path");
}

inline void AddPairFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--i", o.i, "Source user");
  cmd->add_option("--j", o.j, "Observing user");
}

inline AccountingConfig ResolveConfig(const Options& o, const Flags& f) {
  AccountingConfig cfg;
  if (!o.config.empty()) cfg = ConfigFromJson(ReadJsonFile(o.config));
  if (f.given("--T")) cfg.T = o.T;
  if (f.given("--K")) cfg.amp.K = o.K;
  if (f.given("--eta")) cfg.amp.eta = o.eta;
  if (f.given("--Delta")) cfg.amp.Delta = o.Delta;
  if (f.given("--sigma")) cfg.amp.sigma = o.sigma;
  if (f.given("--delta")) cfg.delta = o.delta;
  if (f.given("--delta-split")) cfg.conversion_fraction = o.delta_split;
  if (f.given("--level")) {
    cfg.level = o.level == "user" ? PrivacyLevel::kUser : PrivacyLevel::kRecord;
  }
  if (f.given("--batch") || f.given("--local-size")) {
    RecordSampling r = cfg.amp.record.value_or(RecordSampling{});
    if (f.given("--batch")) r.batch = o.batch;
    if (f.given("--local-size")) r.local_size = o.local_size;
    cfg.amp.record = r;
  }
  if (f.given("--strongly-convex")) {
    cfg.amp.convexity = StronglyConvex{o.strongly_convex[0], o.strongly_convex[1]};
  }
  if (f.given("--cap-contributions")) cfg.cap_contributions = true;
  if (f.given("--gamma-policy")) {
    cfg.gamma_policy =
        o.gamma_policy == "all_ones" ? GammaPolicy::kAllOnes : GammaPolicy::kGridSearch;
  }
  if (f.given("--h")) cfg.discretize.h = o.h;
  if (f.given("--mu-resolution")) cfg.discretize.mu_resolution = o.mu_resolution;
  if (f.given("--literal-eta-scaling")) cfg.amp.literal_eta_scaling = true;
  cfg.Validate();
  return cfg;
}

// The --scheme flag wins over a "scheme" key in the graph file.
inline TransitionMatrix ResolveTransition(const Options& o, const Flags& f, GraphSpec& spec) {
  const Json file = ReadJsonFile(o.graph);
  spec = GraphFromJson(file);
  std::string scheme = o.scheme;
  if (!f.given("--scheme") && file.contains("scheme") && file.at("scheme").is_string()) {
    scheme = file.at("scheme").get<std::string>();
  }
  if (scheme == "mh") scheme = "metropolis_hastings";
  if (scheme == "lazy") scheme = "lazy_simple_walk";
  return BuildTransition(spec, ParseTransitionScheme(scheme));
}

inline void CheckPair(const Options& o, int n) {
  if (o.i < 0 || o.i >= n || o.j < 0 || o.j >= n) {
    Fail(ErrorCode::kInvalidArgument, "--i/--j outside [0, n)");
  }
  if (o.i == o.j) Fail(ErrorCode::kInvalidArgument, "--i and --j must differ");
}

inline void Emit(const Options& o, const std::string& csv, std::ostream& out) {
  if (o.out.empty()) {
    out << csv;
    return;
  }
  std::ofstream file(o.out);
  if (!file) Fail(ErrorCode::kFormat, "cannot write " + o.out);
  file << csv;
}

}  // namespace cli

inline int RunCli(const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  using cli::Flags;
  using cli::Options;
  CLI::App app{"Pairwise network f-DP accountant for decentralized DP-SGD", "pnfdp"};
  app.require_subcommand(1, 1);
  // "-h" would collide with the lattice-spacing flag "--h".
  app.set_help_flag("--help", "Print this help message and exit");
  Options o;
  Flags f;

  auto* graph_check = app.add_subcommand("graph-check", "Spectral and ergodicity report");
  cli::AddGraphFlags(graph_check, o);

  auto* weights = app.add_subcommand("weights", "First-visit weights for a pair (CSV)");
  cli::AddGraphFlags(weights, o);
  cli::AddPairFlags(weights, o);
  cli::AddOutFlag(weights, o);
  weights->add_option("--T", o.T, "Horizon");
  weights->add_option("--weighting", o.weighting, "hitting or power")
      ->check(CLI::IsMember({"hitting", "power"}));

  auto* budget = app.add_subcommand("budget", "Pairwise f-DP budget (JSON)");
  cli::AddGraphFlags(budget, o);
  cli::AddPairFlags(budget, o);
  cli::AddAccountingFlags(budget, o);

  auto* matrix = app.add_subcommand("matrix", "All-pairs f-DP budgets (JSON + CSV)");
  cli::AddGraphFlags(matrix, o);
  cli::AddAccountingFlags(matrix, o);
  cli::AddOutFlag(matrix, o);

  auto* calibrate = app.add_subcommand("calibrate", "Noise calibration for a pair");
  cli::AddGraphFlags(calibrate, o);
  cli::AddPairFlags(calibrate, o);
  cli::AddAccountingFlags(calibrate, o);
  calibrate->add_option("--epsilon", o.epsilon, "Target epsilon")->required();

  auto* rdp_budget = app.add_subcommand("rdp-budget", "RDP baseline budget for a pair");
  cli::AddGraphFlags(rdp_budget, o);
  cli::AddPairFlags(rdp_budget, o);
  cli::AddAccountingFlags(rdp_budget, o);
  rdp_budget->add_option("--weighting", o.weighting, "hitting or power")
      ->check(CLI::IsMember({"hitting", "power"}));

  auto* secldp = app.add_subcommand("secldp", "Correlated-noise gossip accounting");
  cli::AddGraphFlags(secldp, o);
  secldp->add_option("--q", o.q, "Collusion level");
  secldp->add_option("--Delta", o.Delta, "Clipping norm");
  secldp->add_option("--sigma-dp", o.sigma_dp, "Independent noise std");
  secldp->add_option("--sigma-cor", o.sigma_cor, "Correlated noise std");
  secldp->add_option("--rounds", o.rounds, "Number of rounds");
  secldp->add_option("--delta", o.delta, "Target delta");
  secldp->add_option("--epsilon", o.epsilon, "Calibrate to this epsilon");
  secldp->add_option("--cor-ratio", o.cor_ratio, "sigma_cor / sigma_dp");

  auto* simulate = app.add_subcommand("simulate", "Run a training simulation (CSV)");
  cli::AddGraphFlags(simulate, o);
  cli::AddAccountingFlags(simulate, o);
  cli::AddOutFlag(simulate, o);
  simulate->add_option("--algorithm", o.algorithm, "walk or decor")
      ->check(CLI::IsMember({"walk", "decor"}));
  simulate->add_option("--seed", o.seed, "Random seed");
  simulate->add_option("--start", o.i, "Start node of the walk");
  simulate->add_option("--per-user", o.per_user, "Samples per user");
  simulate->add_option("--dim", o.dim, "Feature dimension");
  simulate->add_option("--sigma-dp", o.sigma_dp, "DecoR independent noise");
  simulate->add_option("--sigma-cor", o.sigma_cor, "DecoR correlated noise");
  simulate->add_option("--checkpoint-every", o.checkpoint_every,
      "Rounds between metric rows");
  simulate->add_option("--l2", o.l2, "L2 regularization");

  auto* compare = app.add_subcommand("compare", "f-DP vs RDP vs hitting-time RDP");
  cli::AddGraphFlags(compare, o);
  cli::AddPairFlags(compare, o);
  cli::AddAccountingFlags(compare, o);
  cli::AddOutFlag(compare, o);
  compare->add_option("--epsilon", o.epsilon,
      "Calibrate sigma per method for the pair");

  for (auto* sub : app.get_subcommands({})) {
    sub->set_help_flag("--help", "Print this help message and exit");
  }

  std::vector<const char*> argv;
  argv.push_back("pnfdp");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (auto* sub : app.get_subcommands({})) {
    if (sub->parsed()) f.active = sub;
  }

  try {
    GraphSpec spec;
    if (graph_check->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      Json j = ToJson(Analyze(w));
      j["n"] = spec.n;
      j["edges"] = spec.edges.size();
      j["fiedler"] = spec.n >= 2 ? LaplacianFiedler(spec) : 0.0;
      j["scheme"] = o.scheme;
      out << j.dump(2) << '\n';
    } else if (weights->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      cli::CheckPair(o, w.n());
      Require(o.T >= 1, "--T must be >= 1");
      const HittingWeights hw = o.weighting == "power"
                                    ? PowerWeights(w, o.i, o.j, o.T)
                                    : ComputeHittingWeights(w, o.i, o.j, o.T);
      cli::Emit(o, HittingWeightsCsv(hw), out);
    } else if (budget->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      cli::CheckPair(o, w.n());
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      Json j = ToJson(PairBudget(w, o.i, o.j, cfg));
      j["config"] = ToJson(cfg);
      out << j.dump(2) << '\n';
    } else if (matrix->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      const auto m = PairwiseMatrix(w, cfg);
      double max_eps = 0.0;
      for (const auto& row : m) {
        for (const auto& r : row) {
          if (r.applicable) max_eps = std::max(max_eps, r.epsilon);
        }
      }
      const std::string csv = EpsilonMatrixCsv(m);
      if (o.out.empty()) {
        out << csv;
      } else {
        cli::Emit(o, csv, out);
        Json j = {{"n", w.n()}, {"max_epsilon", max_eps}, {"csv", o.out},
                  {"config", ToJson(cfg)}};
        if (w.n() >= 2) j["example"] = ToJson(m[0][1]);
        out << j.dump(2) << '\n';
      }
    } else if (calibrate->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      cli::CheckPair(o, w.n());
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      const double sigma = CalibrateSigma(w, o.i, o.j, o.epsilon, cfg);
      AccountingConfig at = cfg;
      at.amp.sigma = sigma;
      Json j = {{"sigma", sigma}, {"target_epsilon", o.epsilon},
                {"report", ToJson(PairBudget(w, o.i, o.j, at))}, {"config", ToJson(at)}};
      out << j.dump(2) << '\n';
    } else if (rdp_budget->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      cli::CheckPair(o, w.n());
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      const auto weighting =
          o.weighting == "power" ? RdpWeighting::kPowerOfW : RdpWeighting::kHittingTime;
      const RdpBudgetReport r = RdpPairBudget(w, o.i, o.j, cfg, weighting);
      Json j = {{"i", o.i}, {"j", o.j}, {"epsilon", r.epsilon}, {"best_order", r.best_order},
                {"count", r.count}, {"weighting", o.weighting}, {"config", ToJson(cfg)}};
      out << j.dump(2) << '\n';
    } else if (secldp->parsed()) {
      spec = LoadGraph(o.graph);
      SecParams p;
      p.n = spec.n;
      p.q = o.q;
      p.Delta = o.Delta;
      p.sigma_dp = o.sigma_dp;
      p.sigma_cor = o.sigma_cor;
      p.lambda = LaplacianFiedler(spec);
      Json j = {{"graph", o.graph}, {"n", p.n}, {"q", p.q}, {"Delta", p.Delta}, {"fiedler", p.lambda},
                {"rounds", o.rounds}, {"delta", o.delta}};
      if (f.given("--epsilon")) {
        const double ratio = o.cor_ratio >= 0.0 ? o.cor_ratio : 0.0;
        const SecCalibration c = SecCalibrate(p, o.rounds, o.epsilon, o.delta, ratio);
        j["target_epsilon"] = o.epsilon;
        j["cor_ratio"] = ratio;
        j["sigma_dp"] = c.sigma_dp;
        j["sigma_cor"] = c.sigma_cor;
        j["mu_total"] = c.mu_total;
      } else {
        const SecEpsDelta r = SecToEpsDelta(p, o.rounds, o.delta);
        j["sigma_dp"] = p.sigma_dp;
        j["sigma_cor"] = p.sigma_cor;
        j["mu"] = r.mu_round;
        j["mu_total"] = r.mu_total;
        j["epsilon"] = r.epsilon;
        j["epsilon_closed_form"] = r.epsilon_closed_form;
      }
      out << j.dump(2) << '\n';
    } else if (simulate->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      SimConfig s;
      s.T = cfg.T;
      s.K = cfg.amp.K;
      s.eta = cfg.amp.eta;
      s.sigma = cfg.amp.sigma;
      s.sigma_dp = o.sigma_dp;
      s.sigma_cor = o.sigma_cor;
      s.clip = cfg.amp.Delta;
      s.batch = cfg.amp.record ? cfg.amp.record->batch : 1;
      s.start = o.i;
      s.seed = o.seed;
      s.l2 = o.l2;
      s.checkpoint_every = o.checkpoint_every;
      if (cfg.cap_contributions) s.cap = PrepareNetwork(w, cfg).visits.count;
      const Dataset data = SynthLogregData(w.n(), o.per_user, o.dim, o.seed);
      const RunMetrics m = o.algorithm == "walk" ? RunWalkDpsgd(s, w, data)
                                                 : RunDecor(s, w, data);
      cli::Emit(o, m.ToCsv(), out);
      if (!o.out.empty()) {
        Json j = {{"algorithm", o.algorithm}, {"final_objective", m.objective.back()},
                  {"final_accuracy", m.accuracy.back()}, {"visits", m.visits},
                  {"params_hash", m.params_hash}, {"csv", o.out}, {"seed", o.seed},
                  {"config", ToJson(cfg)}};
        if (o.algorithm == "decor") j["max_correlated_sum"] = m.max_correlated_sum;
        out << j.dump(2) << '\n';
      }
    } else if (compare->parsed()) {
      const TransitionMatrix w = cli::ResolveTransition(o, f, spec);
      const AccountingConfig cfg = cli::ResolveConfig(o, f);
      if (f.given("--epsilon")) {
        cli::CheckPair(o, w.n());
        const double s_fdp = CalibrateSigma(w, o.i, o.j, o.epsilon, cfg);
        const double s_hit = RdpCalibrateSigma(w, o.i, o.j, o.epsilon, cfg,
                                               RdpWeighting::kHittingTime);
        const double s_rdp = RdpCalibrateSigma(w, o.i, o.j, o.epsilon, cfg,
                                               RdpWeighting::kPowerOfW);
        Json j = {{"i", o.i}, {"j", o.j}, {"target_epsilon", o.epsilon},
                  {"sigma_fdp", s_fdp}, {"sigma_rdp_hitting", s_hit}, {"sigma_rdp", s_rdp},
                  {"ordering_holds", s_fdp <= s_hit && s_hit <= s_rdp},
                  {"config", ToJson(cfg)}};
        out << j.dump(2) << '\n';
      } else {
        const NetworkContext ctx = PrepareNetwork(w, cfg);
        std::vector<std::pair<int, int>> pairs;
        if (f.given("--i") || f.given("--j")) {
          cli::CheckPair(o, w.n());
          pairs.emplace_back(o.i, o.j);
        } else {
          for (int a = 0; a < w.n(); ++a) {
            for (int b = 0; b < w.n(); ++b) {
              if (a != b) pairs.emplace_back(a, b);
            }
          }
        }
        std::vector<std::vector<BudgetReport>> fdp;
        if (pairs.size() > 1) fdp = PairwiseMatrix(w, cfg);
        std::ostringstream csv;
        csv.precision(17);
        csv << "i,j,fdp,rdp_hitting,rdp\n";
        int ordered = 0;
        for (const auto& [a, b] : pairs) {
          const double e_fdp = pairs.size() > 1
                                   ? fdp[a][b].epsilon
                                   : BudgetFromWeights(ComputeHittingWeights(w, a, b, cfg.T),
                                                       ctx, cfg).epsilon;
          const double e_hit =
              RdpBudgetFromWeights(ComputeHittingWeights(w, a, b, cfg.T), ctx, cfg).epsilon;
          const double e_rdp =
              RdpBudgetFromWeights(PowerWeights(w, a, b, cfg.T), ctx, cfg).epsilon;
          if (e_fdp <= e_hit && e_hit <= e_rdp) ++ordered;
          csv << a << ',' << b << ',' << e_fdp << ',' << e_hit << ',' << e_rdp << '\n';
        }
        cli::Emit(o, csv.str(), out);
        if (!o.out.empty()) {
          Json j = {{"pairs", pairs.size()}, {"ordered_pairs", ordered},
                    {"csv", o.out}, {"config", ToJson(cfg)}};
          out << j.dump(2) << '\n';
        }
      }
    }
  } catch (const Error& e) {
    err << Json{{"error", ErrorCodeName(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << Json{{"error", "internal_error"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pnfdp

#endif  // PNFDP_CLI_HPP_
