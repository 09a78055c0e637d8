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

// Multiplicative-weights feasibility solver for the welfare LP with an
// outer search over the welfare target B.
//
// Rows of A x >= b, in order: welfare (sum of utilities >= B), then for each
// agent "received - contributed >= -eps", then for each agent
// "contributed - received >= -eps". The polytope P holds per-agent mass <= 1.

#ifndef DEXCHANGE_MWU_H_
#define DEXCHANGE_MWU_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dexchange/instance.h"
#include "dexchange/oracles.h"
#include "dexchange/sharing.h"
#include "dexchange/solution.h"

namespace dexchange {

struct ImbalanceConfig {
  double budget_delta = 0.0;  // C: total compensation for over-contributors
  double budget_gamma = 0.0;  // C': total collected from over-receivers
  ConvexCost cost_delta;
  ConvexCost cost_gamma;
};

struct MwuConfig {
  // Balance slack; negative means "use the instance's epsilon".
  double eps = -1.0;
  // B-grid ratio: targets are eps (1 + delta)^k.
  double delta = 1.0 / 3.0;
  // Accuracy parameter handed to the oracle; fixes its factor alpha.
  double oracle_eps = 0.1;
  // Iteration cap; the run uses min(theoretical T, max_iters).
  int max_iters = 20000;
  std::optional<double> eta_override;
  std::uint64_t seed = 0;
  // First exact-LP certificate check on the generated columns; later checks
  // come at doubling iteration counts (0 disables them).
  int certify_every = 25;
  // Share generated columns across B probes for the final re-optimization.
  bool pool_columns = true;
  int threads = 1;
  // JSON-lines telemetry path; empty disables tracing.
  std::string trace_path;
  std::optional<ImbalanceConfig> imbalance;
};

struct PriceAssembly {
  std::vector<double> p;  // normalized row weights, 2n + 1 entries
  DualPrices q;
  double threshold = 0.0;  // p.b / alpha
};

// Row distribution, pair prices Q_ij = p_0 + (p+_i - p-_i) - (p+_j - p-_j),
// and the infeasibility threshold for target B.
PriceAssembly AssemblePrices(std::span<const double> w, int n, double B, double eps,
                             double alpha);

struct MwuOutcome {
  bool feasible = false;
  ExchangeSolution solution;  // average of iterates when feasible
  std::vector<Column> generated;
  int iterations = 0;
  MwuTelemetry telemetry;
};

// One feasibility run for target B. Throws std::logic_error if a loss leaves
// [-1, 1].
MwuOutcome MwuFeasibility(const Instance& instance, double B, const MwuConfig& config,
                          OracleKind oracle, ShareCache* cache = nullptr);

// Re-optimizes weights over the solution's columns with an exact LP: welfare
// does not drop below a balance-feasible input and at most one column per LP
// row stays active. Returns the input unchanged if the LP fails.
ExchangeSolution Sparsify(const Instance& instance, const ExchangeSolution& solution,
                          ShareCache* cache = nullptr);

// Search over B with exponential probing then bisection; the returned
// solution is balance-feasible for the configured epsilon.
std::pair<ExchangeSolution, SolveReport> SolveWelfare(const Instance& instance,
                                                      const MwuConfig& config,
                                                      OracleKind oracle);

// Process-wide count of runs whose regret inequality failed.
int RegretAuditFailures();

// Theoretical iteration count 32 n^2 alpha^2 ln n / eps^2.
double TheoreticalIterations(int n, double alpha, double eps);

}  // namespace dexchange

#endif  // DEXCHANGE_MWU_H_
