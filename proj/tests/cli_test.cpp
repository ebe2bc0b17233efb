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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pnfdp/cli.hpp"
#include "pnfdp/graphs.hpp"

namespace pnfdp {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pnfdp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
    Write("two.json", R"({"n": 2, "edges": [[0, 1]]})");
    Write("cube.json", R"({"family": "hypercube", "dim": 3})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return Path(name);
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string Slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

TEST_F(CliTest, BudgetMatchesLibrary) {
  const CliResult r = Invoke({"budget", "--graph", Path("two.json"), "--i", "0", "--j", "1",
                           "--T", "275", "--sigma", "1", "--delta", "1e-5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  AccountingConfig cfg;
  cfg.T = 275;
  const TransitionMatrix w =
      BuildTransition(graphs::Complete(2), TransitionScheme::kMetropolisHastings);
  EXPECT_EQ(j.at("epsilon").get<double>(), PairBudget(w, 0, 1, cfg).epsilon);
  EXPECT_GT(j.at("epsilon").get<double>(), 0.0);
  EXPECT_EQ(j.at("config").at("T"), 275);
  EXPECT_EQ(j.at("config").at("delta"), 1e-5);
  EXPECT_EQ(j.at("config").at("level"), "user");
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const std::string cfg = Write("cfg.json", R"({"T": 5, "K": 2, "sigma": 2.0, "delta": 1e-6})");
  const CliResult r = Invoke({"budget", "--graph", Path("cube.json"), "--config", cfg, "--T", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("config").at("T"), 7);
  EXPECT_EQ(j.at("config").at("K"), 2);
  EXPECT_EQ(j.at("config").at("sigma"), 2.0);
  EXPECT_EQ(j.at("config").at("delta"), 1e-6);
}

TEST_F(CliTest, CompareOrdering) {
  const CliResult r = Invoke({"compare", "--graph", Path("cube.json"), "--T", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "i,j,fdp,rdp_hitting,rdp");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::vector<double> v;
    for (std::string cell; std::getline(fields, cell, ',');) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 5u);
    EXPECT_LE(v[2], v[3]) << line;
    EXPECT_LE(v[3], v[4]) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 56);
}

TEST_F(CliTest, CompareCalibration) {
  const CliResult r = Invoke({"compare", "--graph", Path("cube.json"), "--T", "20", "--i", "0",
                           "--j", "7", "--epsilon", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j.at("ordering_holds").get<bool>());
  EXPECT_LT(j.at("sigma_fdp").get<double>(), j.at("sigma_rdp").get<double>());
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const CliResult r = Invoke({"budget", "--graph", Path("two.json"), "--bogus", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(Invoke({}).code, 2);
  EXPECT_EQ(Invoke({"budget", "--i", "0"}).code, 2);  // --graph is required
}

TEST_F(CliTest, ErrorsAreJson) {
  CliResult r = Invoke({"budget", "--graph", Path("missing.json")});
  EXPECT_EQ(r.code, 1);
  Json j = Json::parse(r.err);
  EXPECT_EQ(j.at("error"), "format_error");
  EXPECT_FALSE(j.at("message").get<std::string>().empty());

  r = Invoke({"budget", "--graph", Path("two.json"), "--i", "1", "--j", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err).at("error"), "invalid_argument");

  Write("swap.json", R"({"n": 2, "edges": [[0, 1]], "matrix": [[0, 1], [1, 0]]})");
  r = Invoke({"budget", "--graph", Path("swap.json"), "--scheme", "explicit"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err).at("error"), "validation_error");

  Write("bad.json", "{not json");
  r = Invoke({"graph-check", "--graph", Path("bad.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err).at("error"), "format_error");
}

TEST_F(CliTest, GraphCheck) {
  const CliResult r = Invoke({"graph-check", "--graph", Path("cube.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("lambda2").get<double>(), 0.5, 1e-12);  // W = (I + A)/4 on the 3-cube
  EXPECT_NEAR(j.at("fiedler").get<double>(), 2.0, 1e-12);
  EXPECT_TRUE(j.at("is_aperiodic").get<bool>());
  EXPECT_EQ(j.at("n"), 8);
  EXPECT_EQ(j.at("edges"), 12);
}

TEST_F(CliTest, WeightsCsv) {
  const CliResult r = Invoke({"weights", "--graph", Path("cube.json"), "--i", "0", "--j", "7",
                           "--T", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const TransitionMatrix w =
      BuildTransition(graphs::Hypercube(3), TransitionScheme::kMetropolisHastings);
  EXPECT_EQ(r.out, HittingWeightsCsv(ComputeHittingWeights(w, 0, 7, 6)));
  const CliResult p = Invoke({"weights", "--graph", Path("cube.json"), "--i", "0", "--j", "7",
                           "--T", "6", "--weighting", "power"});
  EXPECT_EQ(p.out, HittingWeightsCsv(PowerWeights(w, 0, 7, 6)));
}

TEST_F(CliTest, MatrixWritesCsvAndSummary) {
  const std::string csv = Path("eps.csv");
  const CliResult r = Invoke({"matrix", "--graph", Path("two.json"), "--T", "4", "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("n"), 2);
  const std::string text = Slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "i,j0,j1");
  EXPECT_EQ(j.at("max_epsilon").get<double>(), j.at("example").at("epsilon").get<double>());
  EXPECT_EQ(j.at("config").at("T"), 4);
}

TEST_F(CliTest, CalibrateMeetsTarget) {
  const CliResult r = Invoke({"calibrate", "--graph", Path("cube.json"), "--i", "0", "--j", "1",
                           "--T", "20", "--epsilon", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_LE(j.at("report").at("epsilon").get<double>(), 2.0);
  EXPECT_GE(j.at("report").at("epsilon").get<double>(), 2.0 * (1.0 - 1e-3));
  EXPECT_EQ(j.at("config").at("sigma"), j.at("sigma"));
}

TEST_F(CliTest, RdpBudget) {
  const CliResult r = Invoke({"rdp-budget", "--graph", Path("cube.json"), "--T", "20",
                           "--weighting", "power"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("weighting"), "power");
  EXPECT_GT(j.at("epsilon").get<double>(), 0.0);
  EXPECT_GT(j.at("best_order").get<double>(), 1.0);
}

TEST_F(CliTest, SecLdp) {
  CliResult r = Invoke({"secldp", "--graph", Path("cube.json"), "--q", "7", "--Delta", "0.5",
                     "--sigma-dp", "2", "--sigma-cor", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("mu").get<double>(), 0.25);
  EXPECT_EQ(j.at("graph"), Path("cube.json"));
  r = Invoke({"secldp", "--graph", Path("cube.json"), "--q", "1", "--epsilon", "2", "--rounds",
           "10", "--cor-ratio", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = Json::parse(r.out);
  EXPECT_EQ(j.at("sigma_cor").get<double>(), j.at("sigma_dp").get<double>());
}

TEST_F(CliTest, SimulateIsReproducible) {
  const std::vector<std::string> args = {"simulate", "--graph", Path("cube.json"), "--T", "200",
                                         "--sigma", "0.3", "--seed", "9",
                                         "--checkpoint-every", "50", "--dim", "4"};
  const CliResult a = Invoke(args), b = Invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "round,objective,accuracy");

  std::vector<std::string> decor = args;
  decor.insert(decor.end(), {"--algorithm", "decor", "--sigma-cor", "2", "--out",
                             Path("decor.csv")});
  const CliResult d = Invoke(decor);
  ASSERT_EQ(d.code, 0) << d.err;
  const Json j = Json::parse(d.out);
  EXPECT_LE(j.at("max_correlated_sum").get<double>(), 1e-10);
  EXPECT_EQ(j.at("seed"), 9);
  EXPECT_FALSE(Slurp(Path("decor.csv")).empty());
}

TEST_F(CliTest, GraphFileSchemeKey) {
  Write("lazy.json", R"({"family": "ring", "n": 5, "scheme": "lazy"})");
  const Json lazy = Json::parse(Invoke({"graph-check", "--graph", Path("lazy.json")}).out);
  const Json mh = Json::parse(
      Invoke({"graph-check", "--graph", Path("lazy.json"), "--scheme", "mh"}).out);
  EXPECT_NE(lazy.at("lambda2").get<double>(), mh.at("lambda2").get<double>());
}

int RunBinary(const std::string& args) {
  const std::string cmd = std::string(PNFDP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  EXPECT_EQ(RunBinary("--help"), 0);
  EXPECT_EQ(RunBinary("budget --graph " + Path("two.json") + " --nope"), 2);
  EXPECT_EQ(RunBinary("budget --graph " + Path("missing.json")), 1);
  EXPECT_EQ(RunBinary("budget --graph " + Path("two.json") + " --T 3"), 0);
}

}  // namespace
}  // namespace pnfdp
