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

// Road-network experiment: no-sharing baseline, the pairwise matching
// benchmark, and the MWU solver over replicated instances.

#ifndef DEXCHANGE_EXPERIMENT_H_
#define DEXCHANGE_EXPERIMENT_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dexchange/instances.h"
#include "dexchange/mwu.h"
#include "dexchange/solution.h"

namespace dexchange {

// Optimum of the exchange LP restricted to agents {i, j} under eps-balance,
// with the trade that attains it.
struct PairTrade {
  double welfare = 0.0;
  ExchangeSolution solution;
};
PairTrade PairwiseOptimum(const Instance& instance, AgentId i, AgentId j, double eps);

// Exact maximum-weight matching by subset DP; n <= 24. weights is symmetric
// n x n; pairs with weight <= 0 are never matched. Returns (i, j), i < j.
std::vector<std::pair<int, int>> MaxWeightMatching(const std::vector<std::vector<double>>& weights);

// Maximum-weight matching over pairwise eps-balance optima; the union of the
// matched pair trades.
ExchangeSolution MatchingBenchmark(const Instance& instance, double eps);

struct ExperimentConfig {
  Graph graph;
  int replicates = 5;
  std::vector<CorrelationMode> modes{CorrelationMode::kNone};
  std::vector<double> rhos{0.0};
  std::uint64_t seed = 0;
  RoadSpec road;  // seed, correlation and rho are overridden per replicate
  MwuConfig mwu;
  OracleKind oracle = OracleKind::kBucketing;
  int threads = 1;
};

struct ExperimentRow {
  int replicate = 0;
  std::string method;  // baseline | matching | mwu
  double total_utility = 0.0;  // raw units
  double fraction_of_baseline_variance = 0.0;
  std::string correlation_mode;
  double rho = 0.0;
  std::uint64_t seed = 0;
  bool balanced = true;  // every residual within epsilon
};

// Rows sorted by (mode, rho, replicate, method). At rho = 0 every mode
// coincides, so non-"none" modes skip it when "none" is also requested.
std::vector<ExperimentRow> RunExperiment(const ExperimentConfig& config);

// Header plus one line per row; reals use 9 significant digits.
void WriteExperimentCsv(std::ostream& out, const std::vector<ExperimentRow>& rows);

// Box plot of fraction_of_baseline_variance per (mode, rho, method).
void WriteExperimentSvg(std::ostream& out, const std::vector<ExperimentRow>& rows);

}  // namespace dexchange

#endif  // DEXCHANGE_EXPERIMENT_H_
