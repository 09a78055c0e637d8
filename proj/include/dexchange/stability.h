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

// Pairwise and cycle trading rules, stability checks, and the misreport
// harness.

#ifndef DEXCHANGE_STABILITY_H_
#define DEXCHANGE_STABILITY_H_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dexchange/instance.h"
#include "dexchange/solution.h"

namespace dexchange {

// single(i, j) = u_i({j}) on permitted pairs, else 0. mutual(i, j) =
// min(single(i, j), single(j, i)), zero unless both directions are permitted.
class PairwiseWeights {
 public:
  explicit PairwiseWeights(const Instance& instance);

  int n() const { return n_; }
  double single(AgentId i, AgentId j) const { return u_[i * n_ + j]; }
  double mutual(AgentId i, AgentId j) const {
    return std::min(single(i, j), single(j, i));
  }

 private:
  int n_;
  std::vector<double> u_;
};

// Sorted-edge greedy matching on mutual weights (ties by lexicographic pair);
// each matched pair trades singletons so both receive the mutual weight.
ExchangeSolution GreedyMatching(const Instance& instance);

struct BlockingPair {
  AgentId first = 0;
  AgentId second = 0;
  double mutual = 0.0;
};

// Pairs whose mutual weight beats both members' current utility by > 1e-9.
std::vector<BlockingPair> CheckTwoStability(const Instance& instance,
                                            const ExchangeSolution& solution);

struct TradeCycle {
  // agents[t] sends to agents[t + 1] (cyclically); starts at the smallest id.
  std::vector<AgentId> agents;
  double bottleneck = 0.0;
};

// Best bottleneck cycle among agents in `active` over edges with positive
// single utility; ties go to the shortest cycle, then the lexicographically
// smallest sequence. Returns an empty cycle when the graph is acyclic.
TradeCycle BestBottleneckCycle(const PairwiseWeights& weights,
                               const std::vector<char>& active);

// Repeatedly trades along the best bottleneck cycle and removes its agents.
std::pair<ExchangeSolution, std::vector<TradeCycle>> GreedyCycleCanceling(
    const Instance& instance);

// beta * first + (1 - beta) * second, column-wise. Throws on mismatched n or
// beta outside [0, 1].
ExchangeSolution MixSolutions(const ExchangeSolution& first,
                              const ExchangeSolution& second, double beta);

// A strategic report by `agent`: scale its own utility by utility_factor
// (<= 1) and/or hide its data from the listed receivers.
struct Misreport {
  AgentId agent = 0;
  double utility_factor = 1.0;
  std::vector<AgentId> hide_from;

  std::string Describe() const;
};

// The reported instance. Hiding zeroes s_{j,agent} for scalar-form models,
// and otherwise removes the pair (j, agent). Throws std::invalid_argument
// naming the first violated feasibility condition (checked by enumeration).
Instance ApplyMisreport(const Instance& instance, const Misreport& misreport);

struct MisreportViolation {
  AgentId agent = 0;
  Misreport misreport;
  double utility_truthful = 0.0;
  double utility_misreport = 0.0;
};

using Mechanism = std::function<ExchangeSolution(const Instance&)>;

// Random feasible misreports; flags any whose perceived utility (under the
// reported utility) beats the truthful one by > 1e-9.
std::vector<MisreportViolation> StrategyproofnessFuzz(const Instance& instance,
                                                      const Mechanism& mechanism,
                                                      int trials, std::uint64_t seed);

Mechanism CycleCancelingMechanism();
Mechanism GreedyMatchingMechanism();

}  // namespace dexchange

#endif  // DEXCHANGE_STABILITY_H_
