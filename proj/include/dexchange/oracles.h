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

// Per-agent dual oracles: maximize sum_{j in S} Q_ij h_ij(S) over sender
// sets S (or fractional transfers y for continuous models).

#ifndef DEXCHANGE_ORACLES_H_
#define DEXCHANGE_ORACLES_H_

#include <string>
#include <vector>

#include "dexchange/common.h"
#include "dexchange/instance.h"
#include "dexchange/sharing.h"

namespace dexchange {

// Dense n x n matrix of pair prices; entries for non-permitted pairs are
// ignored.
class DualPrices {
 public:
  DualPrices() = default;
  explicit DualPrices(int n, double fill = 0.0)
      : n_(n), q_(static_cast<std::size_t>(n) * n, fill) {}

  int n() const { return n_; }
  double operator()(AgentId receiver, AgentId sender) const {
    return q_[static_cast<std::size_t>(receiver) * n_ + sender];
  }
  double& operator()(AgentId receiver, AgentId sender) {
    return q_[static_cast<std::size_t>(receiver) * n_ + sender];
  }

 private:
  int n_ = 0;
  std::vector<double> q_;
};

struct OracleResult {
  Subset chosen;
  std::vector<double> fractions;  // continuous oracle only
  double value = 0.0;
  int guesses = 0;
};

// sum_{j in S} Q_ij h_ij(S) under the instance's sharing rule.
double OracleObjective(const Instance& instance, AgentId agent, const DualPrices& q,
                       std::span<const AgentId> senders,
                       std::span<const double> fractions = {},
                       ShareCache* cache = nullptr);

// Exact maximum over all subsets of the permitted senders (at most 20).
OracleResult OracleBruteforce(const Instance& instance, AgentId agent,
                              const DualPrices& q, ShareCache* cache = nullptr);

// Approximation factor certified by the bucketing oracle:
// 3e(1 + 3 eps) ln n, never below 1.
double BucketingAlpha(int n, double eps);

// Guess-and-bucket oracle for cross-monotone sharing. Only senders with
// Q_ij > 0 are ever chosen.
OracleResult OracleBucketing(const Instance& instance, AgentId agent,
                             const DualPrices& q, double eps,
                             ShareCache* cache = nullptr);

// Symmetric weighted utilities with size-proportional sharing: sweeps the
// transferred volume phi over a (1 + eps) grid and solves the inner knapsack
// with a profit-scaling FPTAS. Value >= optimum / (1 + eps)^2.
OracleResult OracleKnapsack(const Instance& instance, AgentId agent,
                            const DualPrices& q, double eps);

// Fractional transfers for continuous scalar-form models with
// size-proportional sharing. Value >= optimum / (1 + eps).
OracleResult OracleContinuous(const Instance& instance, AgentId agent,
                              const DualPrices& q, double eps);

// Profit-scaling knapsack: maximize sum profit subject to sum weight <=
// capacity, with profit >= optimum / (1 + eps). Weights are non-negative
// integers. Returns chosen item indices in increasing order.
std::vector<int> KnapsackFptas(const std::vector<double>& profits,
                               const std::vector<std::int64_t>& weights,
                               std::int64_t capacity, double eps);

// g(x) = coefficient * x^exponent with exponent >= 1 (convex, non-decreasing).
struct ConvexCost {
  double coefficient = 1.0;
  double exponent = 2.0;

  double operator()(double x) const;
  // Largest x with cost(x) <= budget.
  double Inverse(double budget) const;
};

struct ImbalanceResult {
  std::vector<double> deltas;
  std::vector<double> gammas;
  double value = 0.0;
};

// Maximizes p.delta + r.gamma subject to sum g(delta_i) <= c_delta,
// sum h(gamma_i) <= c_gamma and delta, gamma >= 0, in closed form.
ImbalanceResult OracleImbalance(const std::vector<double>& p, const std::vector<double>& r,
                                double c_delta, double c_gamma, const ConvexCost& g,
                                const ConvexCost& h);

enum class OracleKind { kBruteforce, kBucketing, kKnapsack, kContinuous };

OracleKind ParseOracleKind(const std::string& name);
std::string OracleKindName(OracleKind kind);

// Throws std::invalid_argument when the oracle does not support the
// instance's model or sharing rule.
void CheckOracleSupport(const Instance& instance, OracleKind kind);

// Certified approximation factor of the oracle on this instance.
double OracleAlpha(const Instance& instance, OracleKind kind, double eps);

OracleResult RunOracle(const Instance& instance, OracleKind kind, AgentId agent,
                       const DualPrices& q, double eps, ShareCache* cache = nullptr);

}  // namespace dexchange

#endif  // DEXCHANGE_ORACLES_H_
