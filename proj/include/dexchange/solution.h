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

#ifndef DEXCHANGE_SOLUTION_H_
#define DEXCHANGE_SOLUTION_H_

#include <string>
#include <vector>

#include "dexchange/common.h"
#include "dexchange/instance.h"
#include "dexchange/sharing.h"

namespace dexchange {

// Agent `agent` receives the data of `senders` with probability `weight`.
// `fractions`, when present, are the transferred fractions y_ij (continuous
// models); an empty list means whole datasets.
struct Column {
  AgentId agent = 0;
  Subset senders;
  double weight = 0.0;
  std::vector<double> fractions;
};

// A randomized exchange: per agent, a distribution over sender sets, the
// leftover mass being the empty set. Optional imbalance slacks: an agent may
// contribute up to delta_i more, or receive up to gamma_i more, than epsilon
// allows.
struct ExchangeSolution {
  int n = 0;
  std::vector<Column> columns;
  std::vector<double> deltas;
  std::vector<double> gammas;
};

// Solver telemetry carried alongside the evaluated numbers.
struct MwuTelemetry {
  int oracle_calls = 0;
  int b_probes = 0;
  std::size_t columns_generated = 0;
  double alpha = 1.0;
  double eta = 0.0;
  double rho = 0.0;
  // Largest regret-bound gap observed: lhs - min_i rhs_i (<= 0 when it holds).
  double regret_lhs = 0.0;
  double regret_rhs = 0.0;
  bool regret_ok = true;
  double max_abs_loss = 0.0;
  bool early_exit = false;
  bool sparsified = false;
  double guarantee = 0.0;  // best_B / (2 alpha (1 + 3 delta))
};

struct SolveReport {
  double welfare = 0.0;
  std::vector<double> per_agent_utility;
  // Utility received minus utility contributed, per agent.
  std::vector<double> balance_residual;
  std::vector<double> received;
  std::vector<double> contributed;
  int iterations = 0;
  bool feasible = true;
  double best_B = 0.0;
  std::string diagnostic;
  MwuTelemetry telemetry;
};

// Throws std::invalid_argument when the solution breaks an invariant: mass
// above 1 + 1e-9, a non-permitted or non-canonical sender set, duplicated
// columns for one agent, or malformed slacks.
void ValidateSolution(const Instance& instance, const ExchangeSolution& solution);

// Welfare, per-agent utility and balance residuals. `feasible` compares each
// residual against epsilon plus the agent's slack.
SolveReport Evaluate(const Instance& instance, const ExchangeSolution& solution,
                     ShareCache* cache = nullptr);

// Multiplies every column weight (and slack) by `factor` in [0, 1].
ExchangeSolution ScaleSolution(const ExchangeSolution& solution, double factor);

// Merges columns with identical (agent, senders, fractions) and drops zero
// weights; column order becomes canonical.
ExchangeSolution MergeColumns(const ExchangeSolution& solution);

// Total column mass of each agent.
std::vector<double> AgentMass(const ExchangeSolution& solution);

}  // namespace dexchange

#endif  // DEXCHANGE_SOLUTION_H_
