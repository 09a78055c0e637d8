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

#include "dexchange/experiment.h"

#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

double BruteMatching(const std::vector<std::vector<double>>& w, std::vector<char>& used) {
  const int n = static_cast<int>(w.size());
  int first = -1;
  for (int i = 0; i < n && first < 0; ++i) {
    if (!used[i]) first = i;
  }
  if (first < 0) return 0.0;
  used[first] = 1;
  double best = BruteMatching(w, used);
  for (int j = first + 1; j < n; ++j) {
    if (used[j] || w[first][j] <= 0.0) continue;
    used[j] = 1;
    best = std::max(best, w[first][j] + BruteMatching(w, used));
    used[j] = 0;
  }
  used[first] = 0;
  return best;
}

TEST(MaxWeightMatching, AgreesWithRecursion) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.3, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) w[i][j] = w[j][i] = std::max(0.0, u(rng));
    }
    const auto pairs = MaxWeightMatching(w);
    std::vector<char> seen(n, 0);
    double total = 0.0;
    for (const auto& [i, j] : pairs) {
      EXPECT_LT(i, j);
      EXPECT_FALSE(seen[i] || seen[j]);
      seen[i] = seen[j] = 1;
      EXPECT_GT(w[i][j], 0.0);
      total += w[i][j];
    }
    std::vector<char> used(n, 0);
    EXPECT_NEAR(total, BruteMatching(w, used), 1e-12);
  }
  EXPECT_THROW(MaxWeightMatching(std::vector<std::vector<double>>(25, std::vector<double>(25))),
               std::invalid_argument);
}

TEST(PairwiseOptimum, AsymmetricPair) {
  InstanceData d;
  d.n = 2;
  d.allowed = {{0, 1}, {1, 0}};
  d.utility.payload = ExplicitTableModel{{{0, {1}, {0.0, 1.0}}, {1, {0}, {0.0, 0.5}}}};
  const Instance inst(std::move(d));
  // Each side receives 0.5, plus the epsilon imbalance on the richer side.
  EXPECT_NEAR(PairwiseOptimum(inst, 0, 1, 0.0).welfare, 1.0, 1e-12);
  EXPECT_NEAR(PairwiseOptimum(inst, 0, 1, 0.1).welfare, 1.1, 1e-12);
}

TEST(MatchingBenchmark, FeasibleOnRoadInstances) {
  const Graph grid = GridGraph(12, 12, 1);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    RoadSpec spec;
    spec.seed = seed;
    const RoadInstance road = GenRoad(grid, spec);
    const SolveReport r = Evaluate(road.instance, MatchingBenchmark(road.instance, 0.01));
    EXPECT_TRUE(r.feasible);
    EXPECT_GT(r.welfare, 0.0);
    for (double m : AgentMass(MatchingBenchmark(road.instance, 0.01))) EXPECT_LE(m, 1.0 + 1e-9);
  }
}

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.graph = GridGraph(12, 12, 1);
  c.replicates = 2;
  c.modes = {CorrelationMode::kNone, CorrelationMode::kRandom};
  c.rhos = {0.0, 0.25};
  c.seed = 5;
  c.mwu.max_iters = 3000;
  return c;
}

TEST(Experiment, RowsAndCsvAreDeterministic) {
  const ExperimentConfig c = SmallConfig();
  const auto rows = RunExperiment(c);
  // none at rho 0 and random at rho 0.25, three methods each.
  EXPECT_EQ(rows.size(), 2u * 2u * 3u);
  std::ostringstream a, b;
  WriteExperimentCsv(a, rows);
  ExperimentConfig threaded = c;
  threaded.threads = 3;
  WriteExperimentCsv(b, RunExperiment(threaded));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "replicate,method,total_utility,fraction_of_baseline_variance,correlation_mode,rho,"
            "seed");
  for (const ExperimentRow& r : rows) {
    if (r.method == "baseline") {
      EXPECT_EQ(r.total_utility, 0.0);
    }
    EXPECT_TRUE(r.balanced);
    EXPECT_GE(r.fraction_of_baseline_variance, 0.0);
    EXPECT_LE(r.fraction_of_baseline_variance, 1.0);
  }
  std::ostringstream svg;
  WriteExperimentSvg(svg, rows);
  EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
}

TEST(Experiment, RejectsZeroReplicates) {
  ExperimentConfig c = SmallConfig();
  c.replicates = 0;
  EXPECT_THROW(RunExperiment(c), std::invalid_argument);
}

}  // namespace
}  // namespace dexchange
