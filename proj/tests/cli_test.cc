// Copyright 2026 The dexchange Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the installed binary end to end through the shell.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

#include "dexchange/instances.h"
#include "dexchange/json_io.h"

namespace dexchange {
namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = ::testing::TempDir() + "dexchange_cli_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name() + "/";
    ASSERT_EQ(std::system(("mkdir -p '" + dir_ + "'").c_str()), 0);
  }

  std::string Path(const std::string& name) const { return dir_ + name; }

  // Exit status of `dexchange <args>`; stdout goes to out.txt, stderr to err.txt.
  int Run(const std::string& args) const {
    const std::string cmd = std::string(DEXCHANGE_CLI) + " " + args + " > '" + Path("out.txt") +
                            "' 2> '" + Path("err.txt") + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Slurp(const std::string& name) const {
    std::ifstream in(Path(name));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  std::string dir_;
};

TEST_F(Cli, GenerateThenSolve) {
  ASSERT_EQ(Run("gen random --n 5 --senders 2 --model table --seed 3 -o " + Path("inst.json")), 0)
      << Slurp("err.txt");
  ASSERT_EQ(Run("solve -i " + Path("inst.json") + " -o " + Path("sol.json") + " --report " +
                Path("rep.json") + " --trace " + Path("trace.jsonl")),
            0)
      << Slurp("err.txt");
  const Json report = ReadJsonFile(Path("rep.json"));
  EXPECT_TRUE(report.at("feasible").get<bool>());
  EXPECT_FALSE(Slurp("trace.jsonl").empty());
  const Instance inst = InstanceFromJson(ReadJsonFile(Path("inst.json")));
  const ExchangeSolution sol = SolutionFromJson(ReadJsonFile(Path("sol.json")), inst);
  EXPECT_NEAR(Evaluate(inst, sol).welfare, report.at("welfare").get<double>(), 1e-9);
}

TEST_F(Cli, KnapsackRejectsShapley) {
  ASSERT_EQ(Run("gen random --n 5 -o " + Path("inst.json")), 0);
  EXPECT_EQ(Run("solve -i " + Path("inst.json") + " --sharing shapley_exact --oracle knapsack"),
            2);
  EXPECT_FALSE(Slurp("err.txt").empty());
}

TEST_F(Cli, MalformedInputsExitTwo) {
  ASSERT_EQ(Run("gen core-gap --n 6 -o " + Path("inst.json")), 0);
  std::ofstream(Path("bad.json")) << R"({"n": 6, "columns": [{"agent": 0}]})";
  EXPECT_EQ(Run("audit -i " + Path("inst.json") + " -s " + Path("bad.json")), 2);
  std::ofstream(Path("garbage.json")) << "{";
  EXPECT_EQ(Run("solve -i " + Path("garbage.json")), 2);
  EXPECT_EQ(Run("solve -i " + Path("missing.json")), 2);
  EXPECT_EQ(Run("solve"), 2);
}

TEST_F(Cli, GreedyMatchingPassesStrictAudit) {
  ASSERT_EQ(Run("gen random --n 6 --senders 3 --seed 9 -o " + Path("inst.json")), 0);
  ASSERT_EQ(Run("stability -i " + Path("inst.json") + " --rule matching -o " + Path("sol.json")),
            0);
  EXPECT_EQ(Run("audit --require-stable --fuzz-trials 20 --mechanism matching -i " +
                Path("inst.json") + " -s " + Path("sol.json")),
            0)
      << Slurp("out.txt");
  const Json out = Json::parse(Slurp("out.txt"));
  EXPECT_TRUE(out.at("blocking_pairs").empty());
  EXPECT_TRUE(out.at("ok").get<bool>());
}

TEST_F(Cli, LongCycleIsBlockedByHeavyPair) {
  const int n = 8;
  ASSERT_EQ(Run("gen core-gap --n 8 -o " + Path("inst.json")), 0);
  WriteJsonFile(Path("cycle.json"), SolutionToJson(CoreGapLongCycle(n)));
  ASSERT_EQ(Run("audit -i " + Path("inst.json") + " -s " + Path("cycle.json")), 0);
  const Json out = Json::parse(Slurp("out.txt"));
  ASSERT_EQ(out.at("blocking_pairs").size(), 1u);
  EXPECT_EQ(out["blocking_pairs"][0].at("agents"), Json::array({0, n - 1}));
  EXPECT_EQ(Run("audit --require-stable -i " + Path("inst.json") + " -s " + Path("cycle.json")),
            1);
}

TEST_F(Cli, ExperimentCsvIsReproducible) {
  const std::string args = "experiment -r 1 --modes none --rhos 0 --seed 4 --max-iters 1500";
  ASSERT_EQ(Run(args + " --csv " + Path("a.csv") + " --svg " + Path("a.svg")), 0)
      << Slurp("err.txt");
  ASSERT_EQ(Run(args + " --csv " + Path("b.csv")), 0);
  EXPECT_EQ(Slurp("a.csv"), Slurp("b.csv"));
  EXPECT_EQ(Slurp("a.csv").rfind("replicate,method,total_utility,", 0), 0u);
  EXPECT_NE(Slurp("a.svg").find("<svg"), std::string::npos);
}

}  // namespace
}  // namespace dexchange
