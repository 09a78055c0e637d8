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

// Hand-built instances and reference computations shared by the tests. The
// references here are deliberately naive and never call into the library's
// own algorithms.

#ifndef DEXCHANGE_TESTS_FIXTURES_H_
#define DEXCHANGE_TESTS_FIXTURES_H_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "dexchange/instance.h"

namespace dexchange::testing {

// Table instance; tables[i] is indexed by mask over senders[i] (sorted).
inline Instance TableInstance(int n, const std::vector<std::vector<AgentId>>& senders,
                              const std::vector<std::vector<double>>& tables,
                              SharingRuleSpec sharing = {}, double epsilon = 0.01) {
  InstanceData d;
  d.n = n;
  d.epsilon = epsilon;
  ExplicitTableModel model;
  for (int i = 0; i < n; ++i) {
    for (AgentId j : senders[i]) d.allowed.emplace_back(i, j);
    if (!senders[i].empty()) model.tables.push_back({i, senders[i], tables[i]});
  }
  d.utility.payload = std::move(model);
  d.sharing = sharing;
  return Instance(std::move(d));
}

// Agents 0 and 1 with u_0({1}) = u01 and u_1({0}) = u10.
inline Instance TwoAgents(double u01, double u10, double epsilon = 0.01) {
  return TableInstance(2, {{1}, {0}}, {{0.0, u01}, {0.0, u10}}, {}, epsilon);
}

// Receiver 0 with senders 1..k. Senders 1..k-1 hold identical data worth 0.5;
// sender k holds distinct data worth 0.5.
inline Instance DuplicateDataInstance(int k, SharingRuleSpec sharing) {
  std::vector<std::vector<AgentId>> senders(k + 1);
  for (int j = 1; j <= k; ++j) senders[0].push_back(j);
  std::vector<double> table(std::size_t{1} << k);
  for (std::size_t mask = 1; mask < table.size(); ++mask) {
    const bool unique = mask >> (k - 1) & 1;
    const bool common = (mask & ((std::size_t{1} << (k - 1)) - 1)) != 0;
    table[mask] = 0.5 * unique + 0.5 * common;
  }
  std::vector<std::vector<double>> tables(k + 1);
  tables[0] = table;
  return TableInstance(k + 1, senders, tables, sharing);
}

// Weighted coverage over `elements` elements: monotone and submodular.
inline std::vector<double> RandomCoverageTable(int senders, int elements, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> weight(elements);
  for (double& w : weight) w = u(rng);
  std::vector<std::vector<char>> covers(senders, std::vector<char>(elements));
  for (auto& c : covers) {
    for (auto& e : c) e = u(rng) < 0.4;
  }
  std::vector<double> table(std::size_t{1} << senders, 0.0);
  for (std::size_t mask = 1; mask < table.size(); ++mask) {
    for (int e = 0; e < elements; ++e) {
      bool hit = false;
      for (int b = 0; b < senders; ++b) hit |= (mask >> b & 1) && covers[b][e];
      if (hit) table[mask] += weight[e];
    }
  }
  return table;
}

// n agents, each receiving from `per` random others through a random
// coverage table.
inline Instance RandomCoverageInstance(int n, int per, std::mt19937_64& rng,
                                       SharingRuleSpec sharing = {}, int elements = 6) {
  std::vector<std::vector<AgentId>> senders(n);
  std::vector<std::vector<double>> tables(n);
  for (int i = 0; i < n; ++i) {
    std::vector<AgentId> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    std::shuffle(others.begin(), others.end(), rng);
    others.resize(std::min<int>(per, n - 1));
    std::sort(others.begin(), others.end());
    senders[i] = others;
    tables[i] = RandomCoverageTable(static_cast<int>(others.size()), elements, rng);
  }
  return TableInstance(n, senders, tables, sharing);
}

// Shapley value by enumerating every ordering of k players.
inline std::vector<double> PermutationShapley(int k,
                                              const std::function<double(std::uint64_t)>& v) {
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(k, 0.0);
  double count = 0.0;
  do {
    std::uint64_t mask = 0;
    for (int p : order) {
      const double before = v(mask);
      mask |= std::uint64_t{1} << p;
      phi[p] += v(mask) - before;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& x : phi) x /= count;
  return phi;
}

}  // namespace dexchange::testing

#endif  // DEXCHANGE_TESTS_FIXTURES_H_
