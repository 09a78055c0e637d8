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

// Instance generators: the exact-cover hardness gadget, the core-gap cycle,
// random synthetic instances, and road-network path instances.

#ifndef DEXCHANGE_INSTANCES_H_
#define DEXCHANGE_INSTANCES_H_

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dexchange/instance.h"
#include "dexchange/solution.h"

namespace dexchange {

// ---- Exact cover by 3-sets ------------------------------------------------

struct X3CSpec {
  int m = 0;  // number of sets
  int k = 0;  // cover size; the universe is {0, ..., 3k - 1}
  std::vector<std::array<int, 3>> sets;
  std::optional<std::vector<int>> known_cover;
};

// Agent layout of the gadget: p_i = i, q_i = m + i, then w, z1, z2.
struct X3CLayout {
  int m = 0;
  AgentId p(int i) const { return i; }
  AgentId q(int i) const { return m + i; }
  AgentId w() const { return 2 * m; }
  AgentId z1() const { return 2 * m + 1; }
  AgentId z2() const { return 2 * m + 2; }
};

struct X3CInstance {
  Instance instance;  // raw units, epsilon 0
  double scale = 1.0;  // MaxFullUtility; divide by it to normalize
  X3CLayout layout;
  double target = 0.0;  // 3 (m + 3k), reached exactly on yes-instances
};

// Throws std::invalid_argument on malformed sets or an invalid known cover.
X3CInstance GenX3C(const X3CSpec& spec);

// Exhaustive search for k pairwise disjoint sets covering the universe.
std::optional<std::vector<int>> FindExactCover(const X3CSpec& spec);

// Random spec with m sets; `want_cover` plants an exact cover, otherwise sets
// are redrawn until none exists (throws after a bounded number of attempts).
X3CSpec RandomX3C(int m, int k, bool want_cover, std::uint64_t seed);

// The feasible witness that reaches the target on a yes-instance.
ExchangeSolution X3CWitness(const X3CInstance& gadget, const std::vector<int>& cover);

// ---- Core-gap cycle -------------------------------------------------------

// Cycle 0 <- 1 <- ... <- n-1 <- 0 (agent i receives from i + 1) with unit
// sizes, plus a heavy pair {0, n-1} of size M = n - 3 in both directions.
// Square-root utilities, size-proportional sharing, raw units. n >= 6.
Instance GenCoreGap(int n);

// Every agent receives from its successor; agent n-1 at rate 1/sqrt(M).
ExchangeSolution CoreGapLongCycle(int n);

// Agents 0 and n-1 trade only with each other at full rate.
ExchangeSolution CoreGapPair(int n);

// ---- Random synthetic instances -------------------------------------------

enum class RandomModel { kSymmetric, kCoverageTable };

struct RandomSpec {
  int n = 5;
  int senders_per_agent = 2;
  RandomModel model = RandomModel::kSymmetric;
  std::uint64_t seed = 0;
  double epsilon = 0.01;
  // Elements per receiver in the coverage-table model.
  int elements = 8;
};

// Normalized instance. Symmetric models use s ~ U[0.1, 1], f = x^c with
// c ~ U[0.3, 1] and size-proportional sharing; coverage tables use exact
// Shapley sharing.
Instance GenRandom(const RandomSpec& spec);

RandomModel ParseRandomModel(const std::string& name);

// ---- Road networks --------------------------------------------------------

struct Graph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, a < b, unique

  std::vector<std::vector<int>> Adjacency() const;
};

// "a,b" lines of non-negative integer node ids. Blank lines, '#' comments, a
// non-numeric header line, self-loops, and duplicates are skipped. Node ids
// are compacted in order of first appearance.
Graph ParseEdgeListCsv(std::istream& in);
Graph LoadEdgeListCsv(const std::string& path);

// w x h lattice; each cell independently gets one random diagonal with
// probability 1/2.
Graph GridGraph(int w, int h, std::uint64_t seed);

enum class CorrelationMode { kNone, kRandom, kLocal };

CorrelationMode ParseCorrelationMode(const std::string& name);
std::string CorrelationModeName(CorrelationMode mode);

struct RoadSpec {
  int radius = 8;
  int n_agents = 20;
  CorrelationMode correlation = CorrelationMode::kNone;
  // kRandom: rho * |E| random edge pairs are merged into one class.
  // kLocal: rho * |V| random vertices merge their incident edges.
  double rho = 0.0;
  std::uint64_t seed = 0;
  int permutations = 10;
  double epsilon = 0.01;
  int min_path_length = 5;
};

struct RoadInstance {
  Instance instance;  // normalized
  double scale = 1.0;  // raw utility = normalized * scale
  double baseline_variance = 0.0;  // sum of v_0(i), raw
  Graph neighborhood;
  std::vector<std::vector<int>> node_paths;  // per agent, in neighborhood ids
};

// Throws std::invalid_argument when the neighborhood cannot host the paths.
RoadInstance GenRoad(const Graph& graph, const RoadSpec& spec);

}  // namespace dexchange

#endif  // DEXCHANGE_INSTANCES_H_
