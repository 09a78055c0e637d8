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

#include "dexchange/solution.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

using ColumnKey = std::tuple<AgentId, Subset, std::vector<double>>;

}  // namespace

void ValidateSolution(const Instance& instance, const ExchangeSolution& solution) {
  if (solution.n != instance.n()) {
    throw std::invalid_argument("solution agent count does not match the instance");
  }
  std::vector<double> mass(instance.n(), 0.0);
  std::map<ColumnKey, int> seen;
  for (const Column& c : solution.columns) {
    if (c.agent < 0 || c.agent >= instance.n()) {
      throw std::invalid_argument("column agent out of range");
    }
    if (!(c.weight >= 0.0 && c.weight <= 1.0 + kEqualityTol)) {
      throw std::invalid_argument("column weights must lie in [0, 1]");
    }
    ToLocal(instance, c.agent, c.senders);
    if (!c.fractions.empty()) {
      if (c.fractions.size() != c.senders.size()) {
        throw std::invalid_argument("one fraction per sender is required");
      }
      for (double y : c.fractions) {
        if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("fractions must lie in [0, 1]");
      }
    }
    if (!seen.emplace(ColumnKey{c.agent, c.senders, c.fractions}, 1).second) {
      throw std::invalid_argument("duplicate column for agent " + std::to_string(c.agent) +
                                  " set " + SubsetToString(c.senders));
    }
    mass[c.agent] += c.weight;
  }
  for (int i = 0; i < instance.n(); ++i) {
    if (mass[i] > 1.0 + kEqualityTol) {
      throw std::invalid_argument("agent " + std::to_string(i) +
                                  " has probability mass above 1");
    }
  }
  for (const auto* v : {&solution.deltas, &solution.gammas}) {
    if (v->empty()) continue;
    if (static_cast<int>(v->size()) != instance.n()) {
      throw std::invalid_argument("imbalance slacks need one entry per agent");
    }
    for (double d : *v) {
      if (!(d >= 0.0) || !std::isfinite(d)) {
        throw std::invalid_argument("imbalance slacks must be non-negative");
      }
    }
  }
}

SolveReport Evaluate(const Instance& instance, const ExchangeSolution& solution,
                     ShareCache* cache) {
  ValidateSolution(instance, solution);
  const int n = instance.n();
  SolveReport r;
  r.per_agent_utility.assign(n, 0.0);
  r.received.assign(n, 0.0);
  r.contributed.assign(n, 0.0);
  r.balance_residual.assign(n, 0.0);
  for (const Column& c : solution.columns) {
    if (c.weight == 0.0 || c.senders.empty()) continue;
    const std::vector<double> h =
        cache ? cache->Get(c.agent, c.senders, c.fractions)
              : Shares(instance, c.agent, c.senders, c.fractions);
    r.per_agent_utility[c.agent] +=
        c.weight * UtilityFractional(instance, c.agent, c.senders, c.fractions);
    for (std::size_t k = 0; k < c.senders.size(); ++k) {
      r.received[c.agent] += c.weight * h[k];
      r.contributed[c.senders[k]] += c.weight * h[k];
    }
  }
  r.feasible = true;
  for (int i = 0; i < n; ++i) {
    r.welfare += r.per_agent_utility[i];
    r.balance_residual[i] = r.received[i] - r.contributed[i];
    const double lo = -instance.epsilon() -
                      (solution.deltas.empty() ? 0.0 : solution.deltas[i]);
    const double hi = instance.epsilon() +
                      (solution.gammas.empty() ? 0.0 : solution.gammas[i]);
    if (r.balance_residual[i] < lo - kEqualityTol ||
        r.balance_residual[i] > hi + kEqualityTol) {
      r.feasible = false;
    }
  }
  return r;
}

ExchangeSolution ScaleSolution(const ExchangeSolution& solution, double factor) {
  if (!(factor >= 0.0 && factor <= 1.0)) {
    throw std::invalid_argument("scale factor must lie in [0, 1]");
  }
  ExchangeSolution out = solution;
  for (Column& c : out.columns) c.weight *= factor;
  for (double& d : out.deltas) d *= factor;
  for (double& g : out.gammas) g *= factor;
  return out;
}

ExchangeSolution MergeColumns(const ExchangeSolution& solution) {
  std::map<ColumnKey, double> merged;
  for (const Column& c : solution.columns) {
    merged[ColumnKey{c.agent, c.senders, c.fractions}] += c.weight;
  }
  ExchangeSolution out;
  out.n = solution.n;
  out.deltas = solution.deltas;
  out.gammas = solution.gammas;
  for (auto& [key, w] : merged) {
    if (w <= 0.0) continue;
    const auto& [agent, senders, fractions] = key;
    out.columns.push_back(Column{agent, senders, w, fractions});
  }
  return out;
}

std::vector<double> AgentMass(const ExchangeSolution& solution) {
  std::vector<double> mass(solution.n, 0.0);
  for (const Column& c : solution.columns) mass[c.agent] += c.weight;
  return mass;
}

}  // namespace dexchange
