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

// Exact welfare LPs over explicit column sets, and the coalition audit.

#ifndef DEXCHANGE_EXACT_H_
#define DEXCHANGE_EXACT_H_

#include <optional>
#include <vector>

#include "dexchange/instance.h"
#include "dexchange/lp.h"
#include "dexchange/sharing.h"
#include "dexchange/solution.h"

namespace dexchange {

struct ColumnLpOptions {
  double balance_eps = 0.0;
  // Per-agent imbalance slacks (empty means zero).
  std::vector<double> deltas;
  std::vector<double> gammas;
  // Optional lower bounds on per-agent utility.
  std::vector<std::optional<double>> utility_floor;
};

struct ColumnLpResult {
  LpResult::Status status = LpResult::Status::kInfeasible;
  ExchangeSolution solution;
  double welfare = 0.0;
  int nonzero_columns = 0;
};

// Maximizes welfare over convex weights on the given columns (their weights
// are ignored) subject to per-agent mass <= 1 and residuals within the
// balance slack. Zero-weight columns are dropped from the result.
ColumnLpResult MaxWelfareOverColumns(const Instance& instance,
                                     const std::vector<Column>& columns,
                                     const ColumnLpOptions& options,
                                     ShareCache* cache = nullptr);

// Every non-empty subset of each agent's permitted senders. Throws
// std::invalid_argument when an agent has more than 12 senders.
std::vector<Column> EnumerateColumns(const Instance& instance);

struct ExactWelfare {
  ExchangeSolution solution;
  double welfare = 0.0;
  int nonzero_columns = 0;
};

// Optimal welfare with residuals in [-relax_eps, relax_eps]. Throws
// std::runtime_error if the LP solver fails.
ExactWelfare ExactWelfareLp(
    const Instance& instance, double relax_eps,
    const std::vector<std::optional<double>>& utility_floor = {});

struct BlockingCoalition {
  std::vector<AgentId> members;
  // Largest t such that every member can reach factor * U_i + t.
  double improvement = 0.0;
  std::vector<double> deviation_utility;
};

struct CoreAuditOptions {
  int max_coalition = 2;
  double margin = 1e-9;
  // Members must beat factor * U_i; factor 1 is the plain core.
  double factor = 1.0;
  // Balance slack allowed inside the deviating coalition.
  double balance_eps = 0.0;
};

// Coalitions of size 2..max_coalition whose members can all strictly gain
// with an internal exchange. Sorted lexicographically. Throws
// std::invalid_argument above 5000 coalitions.
std::vector<BlockingCoalition> ExactCoreAudit(const Instance& instance,
                                              const ExchangeSolution& solution,
                                              const CoreAuditOptions& options);

}  // namespace dexchange

#endif  // DEXCHANGE_EXACT_H_
