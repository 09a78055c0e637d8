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

#include "dexchange/instances.h"

#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include <gtest/gtest.h>

#include "dexchange/exact.h"
#include "dexchange/sharing.h"
#include "dexchange/utility.h"

namespace dexchange {
namespace {

TEST(X3C, OverlappingSetsSplitSharedElements) {
  const X3CInstance g = GenX3C({2, 2, {{0, 1, 2}, {2, 3, 4}}, std::nullopt});
  const X3CLayout& L = g.layout;
  // Each set: its own dummy, two private elements, half of element 2.
  const std::vector<double> h = ShapleyExact(g.instance, L.w(), Subset{L.p(0), L.p(1)});
  EXPECT_NEAR(h[0], 3.5, 1e-12);
  EXPECT_NEAR(h[1], 3.5, 1e-12);
  // Alone, a set is credited every element it covers.
  EXPECT_NEAR(ShapleyExact(g.instance, L.w(), Subset{L.p(0)})[0], 4.0, 1e-12);
  EXPECT_NEAR(Utility(g.instance, L.w(), Subset{L.p(0), L.q(0)}), 4.0, 1e-12);
}

TEST(X3C, LayoutAndWeights) {
  const X3CInstance g = GenX3C({3, 1, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}}, std::nullopt});
  const X3CLayout& L = g.layout;
  EXPECT_EQ(g.instance.n(), 9);
  EXPECT_EQ(L.w(), 6);
  EXPECT_DOUBLE_EQ(Utility(g.instance, L.p(1), Subset{L.z1()}), 4.0);
  EXPECT_DOUBLE_EQ(Utility(g.instance, L.q(1), Subset{L.z2()}), 1.0);
  EXPECT_DOUBLE_EQ(Utility(g.instance, L.z1(), Subset{L.w()}), 3.5);
  EXPECT_DOUBLE_EQ(Utility(g.instance, L.z2(), Subset{L.w()}), 2.5);
  EXPECT_DOUBLE_EQ(g.target, 18.0);
  EXPECT_DOUBLE_EQ(g.scale, 6.0);
}

TEST(X3C, RejectsMalformedSets) {
  EXPECT_THROW(GenX3C({1, 1, {{0, 1, 3}}, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(GenX3C({1, 1, {{0, 1, 1}}, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(GenX3C({2, 1, {{0, 1, 2}}, std::nullopt}), std::invalid_argument);
}

TEST(X3C, RandomSpecsMatchCoverSearch) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const X3CSpec yes = RandomX3C(4, 2, true, seed);
    ASSERT_TRUE(yes.known_cover.has_value());
    ASSERT_TRUE(FindExactCover(yes).has_value());
    std::set<int> covered;
    for (int s : *yes.known_cover) covered.insert(yes.sets[s].begin(), yes.sets[s].end());
    EXPECT_EQ(covered.size(), 6u);
    const X3CSpec no = RandomX3C(4, 2, false, seed);
    EXPECT_FALSE(FindExactCover(no).has_value());
    EXPECT_FALSE(no.known_cover.has_value());
  }
}

TEST(X3C, WitnessIsFeasibleAndHitsTarget) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const X3CSpec spec = RandomX3C(4, 2, true, seed);
    const X3CInstance g = GenX3C(spec);
    const SolveReport r = Evaluate(g.instance, X3CWitness(g, *spec.known_cover));
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.welfare, g.target, 1e-9);
  }
}

TEST(CoreGap, SixAgents) {
  const Instance inst = GenCoreGap(6);
  // Agent 0 hears from its successor (size 1) and from agent 5 (size 3).
  EXPECT_DOUBLE_EQ(Utility(inst, 0, Subset{1, 5}), 2.0);
  EXPECT_DOUBLE_EQ(Shares(inst, 0, Subset{1, 5})[0], 0.5);
  EXPECT_NEAR(Evaluate(inst, CoreGapLongCycle(6)).welfare, 6.0, 1e-12);
  const SolveReport pair = Evaluate(inst, CoreGapPair(6));
  EXPECT_NEAR(pair.per_agent_utility[0], std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(pair.per_agent_utility[5], std::sqrt(3.0), 1e-15);
  EXPECT_THROW(GenCoreGap(5), std::invalid_argument);
}

TEST(CoreGap, LongCycleIsBalancedWithWelfareN) {
  for (int n : {6, 11, 27, 51}) {
    const SolveReport r = Evaluate(GenCoreGap(n), CoreGapLongCycle(n));
    EXPECT_NEAR(r.welfare, n, 1e-9);
    for (double v : r.balance_residual) EXPECT_NEAR(v, 0.0, 1e-12);
    const SolveReport pair = Evaluate(GenCoreGap(n), CoreGapPair(n));
    EXPECT_NEAR(pair.per_agent_utility[0], std::sqrt(n - 3.0), 1e-12);
  }
}

TEST(GenRandom, Deterministic) {
  for (RandomModel model : {RandomModel::kSymmetric, RandomModel::kCoverageTable}) {
    const Instance a = GenRandom({6, 3, model, 42});
    const Instance b = GenRandom({6, 3, model, 42});
    ASSERT_EQ(a.data().allowed, b.data().allowed);
    for (int i = 0; i < 6; ++i) {
      const Subset s(a.senders(i).begin(), a.senders(i).end());
      EXPECT_EQ(Utility(a, i, s), Utility(b, i, s));
    }
  }
}

TEST(GenRandom, ZeroSendersGivesEmptyGraph) {
  const Instance inst = GenRandom({5, 0, RandomModel::kSymmetric, 1});
  EXPECT_TRUE(inst.data().allowed.empty());
}

TEST(GenRandom, NormalizedAndWithinBounds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = GenRandom({7, 3, RandomModel::kSymmetric, seed});
    EXPECT_NEAR(MaxFullUtility(inst), 1.0, 1e-12);
    for (int i = 0; i < 7; ++i) EXPECT_EQ(inst.senders(i).size(), 3u);
  }
}

// Exhaustive diminishing-returns scan of one generated table.
TEST(GenRandom, CoverageTablesAreSubmodular) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = GenRandom({6, 5, RandomModel::kCoverageTable, seed});
    const auto& tables = std::get<ExplicitTableModel>(inst.utility_model().payload).tables;
    for (const auto& t : tables) {
      const std::size_t k = t.senders.size();
      for (std::size_t small = 0; small < (1u << k); ++small) {
        for (std::size_t big = small;; big = (big + 1) | small) {
          for (std::size_t q = 0; q < k; ++q) {
            const std::size_t bit = std::size_t{1} << q;
            if (big & bit) continue;
            EXPECT_GE(t.values[small | bit] - t.values[small],
                      t.values[big | bit] - t.values[big] - 1e-12);
          }
          if (big == (1u << k) - 1) break;
        }
      }
    }
  }
}

TEST(Graph, ParsesEdgeListCsv) {
  std::istringstream in("# road network\nfrom,to\n10,20\n20,30\n\n30,10\n20,10\n7,7\n");
  const Graph g = ParseEdgeListCsv(in);
  EXPECT_EQ(g.nodes, 3);
  EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}}));
  std::istringstream bad("1,2\n3;4\n");
  EXPECT_THROW(ParseEdgeListCsv(bad), std::invalid_argument);
  EXPECT_THROW(LoadEdgeListCsv("/nonexistent/graph.csv"), std::invalid_argument);
}

TEST(Graph, GridHasLatticeEdges) {
  const Graph g = GridGraph(12, 12, 1);
  EXPECT_EQ(g.nodes, 144);
  EXPECT_GE(g.edges.size(), 264u);
  EXPECT_LE(g.edges.size(), 264u + 121u);
  for (const auto& [a, b] : g.edges) EXPECT_LT(a, b);
}

TEST(Correlation, NamesRoundTrip) {
  for (CorrelationMode m : {CorrelationMode::kNone, CorrelationMode::kRandom,
                            CorrelationMode::kLocal}) {
    EXPECT_EQ(ParseCorrelationMode(CorrelationModeName(m)), m);
  }
  EXPECT_THROW(ParseCorrelationMode("global"), std::invalid_argument);
}

std::vector<int> Distances(const Graph& g, int source) {
  const auto adj = g.Adjacency();
  std::vector<int> d(g.nodes, -1);
  std::queue<int> q;
  q.push(source);
  d[source] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : adj[v]) {
      if (d[u] < 0) {
        d[u] = d[v] + 1;
        q.push(u);
      }
    }
  }
  return d;
}

TEST(GenRoad, PathsAreShortestPaths) {
  const Graph grid = GridGraph(12, 12, 2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RoadSpec spec;
    spec.seed = seed;
    const RoadInstance road = GenRoad(grid, spec);
    const auto& model = std::get<PathVarianceModel>(road.instance.utility_model().payload);
    std::set<std::pair<int, int>> edges(road.neighborhood.edges.begin(),
                                        road.neighborhood.edges.end());
    ASSERT_EQ(road.node_paths.size(), 20u);
    for (int i = 0; i < 20; ++i) {
      const auto& nodes = road.node_paths[i];
      const int len = static_cast<int>(nodes.size()) - 1;
      EXPECT_GE(len, 5);
      EXPECT_EQ(Distances(road.neighborhood, nodes.front())[nodes.back()], len);
      ASSERT_EQ(model.paths[i].size(), static_cast<std::size_t>(len));
      for (int t = 0; t < len; ++t) {
        const std::pair<int, int> e{std::min(nodes[t], nodes[t + 1]),
                                    std::max(nodes[t], nodes[t + 1])};
        ASSERT_TRUE(edges.count(e));
        EXPECT_EQ(road.neighborhood.edges[model.paths[i][t]], e);
      }
      EXPECT_GE(model.samples[i], 2);
      EXPECT_LE(model.samples[i], 9);
    }
  }
}

TEST(GenRoad, ZeroRhoKeepsEdgesApart) {
  RoadSpec spec;
  spec.seed = 3;
  const RoadInstance road = GenRoad(GridGraph(12, 12, 2), spec);
  const auto& model = std::get<PathVarianceModel>(road.instance.utility_model().payload);
  const std::set<int> classes(model.edge_class.begin(), model.edge_class.end());
  EXPECT_EQ(classes.size(), model.edge_class.size());
  spec.correlation = CorrelationMode::kRandom;
  spec.rho = 0.5;
  const RoadInstance merged = GenRoad(GridGraph(12, 12, 2), spec);
  const auto& m2 = std::get<PathVarianceModel>(merged.instance.utility_model().payload);
  EXPECT_LT(std::set<int>(m2.edge_class.begin(), m2.edge_class.end()).size(),
            m2.edge_class.size());
}

TEST(GenRoad, DeterministicUnderSeed) {
  const Graph grid = GridGraph(12, 12, 2);
  RoadSpec spec;
  spec.seed = 11;
  spec.correlation = CorrelationMode::kLocal;
  spec.rho = 0.25;
  const RoadInstance a = GenRoad(grid, spec), b = GenRoad(grid, spec);
  EXPECT_EQ(a.node_paths, b.node_paths);
  EXPECT_EQ(a.scale, b.scale);
  EXPECT_EQ(a.instance.data().allowed, b.instance.data().allowed);
  EXPECT_EQ(a.baseline_variance, b.baseline_variance);
}

TEST(GenRoad, NoDonorsMeansNoGain) {
  RoadSpec spec;
  spec.seed = 4;
  const RoadInstance road = GenRoad(GridGraph(12, 12, 2), spec);
  for (int i = 0; i < road.instance.n(); ++i) EXPECT_EQ(Utility(road.instance, i, Subset{}), 0.0);
  EXPECT_GT(road.baseline_variance, 0.0);
}

TEST(GenRoad, ShallowNeighborhoodIsRejected) {
  RoadSpec spec;
  spec.radius = 2;
  EXPECT_THROW(GenRoad(GridGraph(12, 12, 2), spec), std::invalid_argument);
}

}  // namespace
}  // namespace dexchange
