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

#include "dexchange/stability.h"

#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "dexchange/sharing.h"
#include "dexchange/utility.h"

namespace dexchange {
namespace {

constexpr double kConditionTol = 1e-12;
constexpr int kEnumerateConditionSenders = 10;
constexpr int kSampledConditionSubsets = 256;

// Kahn's algorithm on edges prev -> next with single(next, prev) >= tau.
bool HasCycle(const PairwiseWeights& w, const std::vector<char>& active, double tau) {
  const int n = w.n();
  std::vector<int> indegree(n, 0);
  int alive = 0;
  for (int v = 0; v < n; ++v) {
    if (!active[v]) continue;
    ++alive;
    for (int u = 0; u < n; ++u) {
      if (u != v && active[u] && w.single(v, u) >= tau) ++indegree[v];
    }
  }
  std::vector<int> stack;
  for (int v = 0; v < n; ++v) {
    if (active[v] && indegree[v] == 0) stack.push_back(v);
  }
  int removed = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++removed;
    for (int v = 0; v < n; ++v) {
      if (v != u && active[v] && w.single(v, u) >= tau && --indegree[v] == 0) {
        stack.push_back(v);
      }
    }
  }
  return removed < alive;
}

struct ConditionChecker {
  const Instance& truth;
  const Instance& reported;
  AgentId liar;

  void Fail(int condition, AgentId j, const Subset& s, const std::string& what) const {
    throw std::invalid_argument("misreport violates condition " + std::to_string(condition) +
                                " for agent " + std::to_string(j) + " and set " +
                                SubsetToString(s) + ": " + what);
  }

  void Check(AgentId j, const Subset& s) const {
    Subset kept;
    for (AgentId k : s) {
      if (reported.Permitted(j, k)) kept.push_back(k);
    }
    const double u = Utility(truth, j, s);
    const double ur = Utility(reported, j, kept);
    const std::vector<double> h = s.empty() ? std::vector<double>{} : Shares(truth, j, s);
    const std::vector<double> hk =
        kept.empty() ? std::vector<double>{} : Shares(reported, j, kept);
    std::vector<double> hr(s.size(), 0.0);
    for (std::size_t a = 0, b = 0; a < s.size(); ++a) {
      if (b < kept.size() && kept[b] == s[a]) hr[a] = hk[b++];
    }
    const bool holds_liar = std::binary_search(s.begin(), s.end(), liar);
    if (ur > u + kConditionTol) Fail(1, j, s, "reported utility exceeds the true utility");
    for (std::size_t a = 0; a < s.size(); ++a) {
      if ((j == liar || s[a] == liar) && hr[a] > h[a] + kConditionTol) {
        Fail(2, j, s, "a share involving the misreporting agent increased");
      }
    }
    if (j != liar && !holds_liar) {
      if (std::abs(ur - u) > kConditionTol) Fail(3, j, s, "an unrelated utility changed");
      for (std::size_t a = 0; a < s.size(); ++a) {
        if (std::abs(hr[a] - h[a]) > kConditionTol) Fail(4, j, s, "an unrelated share changed");
      }
    }
  }

  void Run() const {
    for (AgentId j = 0; j < truth.n(); ++j) {
      const std::span<const AgentId> all = truth.senders(j);
      const int k = static_cast<int>(all.size());
      auto subset = [&](std::uint64_t mask) {
        Subset s;
        for (int b = 0; b < k; ++b) {
          if (mask & (std::uint64_t{1} << b)) s.push_back(all[b]);
        }
        return s;
      };
      if (k <= kEnumerateConditionSenders) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) Check(j, subset(mask));
      } else {
        KeyedRng rng(Mix64(static_cast<std::uint64_t>(j) + 0x51ULL));
        for (int t = 0; t < kSampledConditionSubsets; ++t) {
          Check(j, subset(rng.Next() & ((std::uint64_t{1} << k) - 1)));
        }
      }
    }
  }
};

}  // namespace

PairwiseWeights::PairwiseWeights(const Instance& instance)
    : n_(instance.n()), u_(static_cast<std::size_t>(n_) * n_, 0.0) {
  for (int i = 0; i < n_; ++i) {
    for (AgentId j : instance.senders(i)) u_[i * n_ + j] = SingletonUtility(instance, i, j);
  }
}

ExchangeSolution GreedyMatching(const Instance& instance) {
  const PairwiseWeights w(instance);
  const int n = instance.n();
  std::vector<std::tuple<double, int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double m = w.mutual(i, j);
      if (m > 0.0) pairs.emplace_back(-m, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> matched(n, 0);
  ExchangeSolution s;
  s.n = n;
  for (const auto& [neg, i, j] : pairs) {
    if (matched[i] || matched[j]) continue;
    matched[i] = matched[j] = 1;
    s.columns.push_back(Column{i, {j}, std::min(1.0, w.single(j, i) / w.single(i, j)), {}});
    s.columns.push_back(Column{j, {i}, std::min(1.0, w.single(i, j) / w.single(j, i)), {}});
  }
  return MergeColumns(s);
}

std::vector<BlockingPair> CheckTwoStability(const Instance& instance,
                                            const ExchangeSolution& solution) {
  const PairwiseWeights w(instance);
  const std::vector<double> u = Evaluate(instance, solution).per_agent_utility;
  std::vector<BlockingPair> out;
  for (int i = 0; i < instance.n(); ++i) {
    for (int j = i + 1; j < instance.n(); ++j) {
      const double m = w.mutual(i, j);
      if (m > u[i] + kEqualityTol && m > u[j] + kEqualityTol) out.push_back({i, j, m});
    }
  }
  return out;
}

TradeCycle BestBottleneckCycle(const PairwiseWeights& w, const std::vector<char>& active) {
  const int n = w.n();
  std::vector<double> levels;
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      if (u != v && active[u] && active[v] && w.single(v, u) > 0.0) {
        levels.push_back(w.single(v, u));
      }
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  TradeCycle best;
  if (levels.empty() || !HasCycle(w, active, levels.front())) return best;
  // Largest level that still leaves a cycle.
  std::size_t lo = 0, hi = levels.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (HasCycle(w, active, levels[mid]) ? lo : hi) = mid;
  }
  const double tau = levels[lo];
  auto edge = [&](int from, int to) { return from != to && w.single(to, from) >= tau; };

  // A cycle's canonical rotation starts at its smallest node s and stays in
  // nodes >= s; BFS with ascending neighbours yields the lexicographically
  // smallest shortest path to each node.
  for (int s = 0; s < n; ++s) {
    if (!active[s]) continue;
    std::vector<int> parent(n, -2), depth(n, 0);
    std::deque<int> queue{s};
    parent[s] = -1;
    int closing = -1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      if (v != s && edge(v, s)) {
        closing = v;
        break;
      }
      if (!best.agents.empty() && depth[v] + 2 > static_cast<int>(best.agents.size())) break;
      for (int u = s + 1; u < n; ++u) {
        if (active[u] && parent[u] == -2 && edge(v, u)) {
          parent[u] = v;
          depth[u] = depth[v] + 1;
          queue.push_back(u);
        }
      }
    }
    if (closing < 0) continue;
    std::vector<AgentId> cycle;
    for (int v = closing; v != -1; v = parent[v]) cycle.push_back(v);
    std::reverse(cycle.begin(), cycle.end());
    if (best.agents.empty() || cycle.size() < best.agents.size() ||
        (cycle.size() == best.agents.size() && cycle < best.agents)) {
      best.agents = std::move(cycle);
    }
  }
  best.bottleneck = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < best.agents.size(); ++t) {
    const AgentId from = best.agents[t];
    const AgentId to = best.agents[(t + 1) % best.agents.size()];
    best.bottleneck = std::min(best.bottleneck, w.single(to, from));
  }
  return best;
}

std::pair<ExchangeSolution, std::vector<TradeCycle>> GreedyCycleCanceling(
    const Instance& instance) {
  const PairwiseWeights w(instance);
  std::vector<char> active(instance.n(), 1);
  ExchangeSolution s;
  s.n = instance.n();
  std::vector<TradeCycle> cycles;
  while (true) {
    TradeCycle c = BestBottleneckCycle(w, active);
    if (c.agents.empty()) break;
    const std::size_t k = c.agents.size();
    for (std::size_t t = 0; t < k; ++t) {
      const AgentId from = c.agents[t];
      const AgentId to = c.agents[(t + 1) % k];
      s.columns.push_back(Column{to, {from}, std::min(1.0, c.bottleneck / w.single(to, from)), {}});
      active[from] = 0;
    }
    cycles.push_back(std::move(c));
  }
  return {MergeColumns(s), std::move(cycles)};
}

ExchangeSolution MixSolutions(const ExchangeSolution& first, const ExchangeSolution& second,
                              double beta) {
  if (first.n != second.n) throw std::invalid_argument("solutions belong to different instances");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  ExchangeSolution mixed;
  mixed.n = first.n;
  for (const Column& c : first.columns) {
    mixed.columns.push_back(Column{c.agent, c.senders, beta * c.weight, c.fractions});
  }
  for (const Column& c : second.columns) {
    mixed.columns.push_back(Column{c.agent, c.senders, (1.0 - beta) * c.weight, c.fractions});
  }
  auto blend = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    if (a.empty() && b.empty()) return out;
    out.assign(first.n, 0.0);
    for (int i = 0; i < first.n; ++i) {
      out[i] = beta * (a.empty() ? 0.0 : a[i]) + (1.0 - beta) * (b.empty() ? 0.0 : b[i]);
    }
    return out;
  };
  mixed.deltas = blend(first.deltas, second.deltas);
  mixed.gammas = blend(first.gammas, second.gammas);
  return MergeColumns(mixed);
}

std::string Misreport::Describe() const {
  std::ostringstream out;
  out << "agent " << agent << " utility x" << utility_factor << " hides from "
      << SubsetToString(hide_from);
  return out.str();
}

Instance ApplyMisreport(const Instance& instance, const Misreport& m) {
  const int n = instance.n();
  if (m.agent < 0 || m.agent >= n) throw std::invalid_argument("misreport agent out of range");
  if (!(m.utility_factor >= 0.0) || !std::isfinite(m.utility_factor)) {
    throw std::invalid_argument("utility factor must be finite and non-negative");
  }
  const Subset hidden = Canonicalize(m.hide_from);
  for (AgentId j : hidden) {
    if (j < 0 || j >= n || !instance.Permitted(j, m.agent)) {
      throw std::invalid_argument("agent " + std::to_string(m.agent) +
                                  " does not send data to " + std::to_string(j));
    }
  }
  InstanceData d = instance.data();
  if (m.utility_factor != 1.0) {
    if (d.utility.agent_scale.empty()) d.utility.agent_scale.assign(n, 1.0);
    d.utility.agent_scale[m.agent] *= m.utility_factor;
  }
  bool drop_pairs = false;
  std::visit(
      [&](auto& model) {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, SymmetricWeightedModel> ||
                      std::is_same_v<M, ContinuousConcaveModel>) {
          for (AgentId j : hidden) model.sizes[j][m.agent] = 0.0;
        } else if constexpr (std::is_same_v<M, ExplicitTableModel>) {
          drop_pairs = true;
          for (auto& t : model.tables) {
            if (!std::binary_search(hidden.begin(), hidden.end(), t.agent)) continue;
            const auto it = std::find(t.senders.begin(), t.senders.end(), m.agent);
            const int pos = static_cast<int>(it - t.senders.begin());
            const int k = static_cast<int>(t.senders.size());
            std::vector<double> values(std::size_t{1} << (k - 1));
            for (std::size_t mask = 0; mask < values.size(); ++mask) {
              const std::size_t low = mask & ((std::size_t{1} << pos) - 1);
              const std::size_t high = (mask >> pos) << (pos + 1);
              values[mask] = t.values[low | high];
            }
            t.senders.erase(it);
            t.values = std::move(values);
          }
        } else if constexpr (std::is_same_v<M, CoverageModel>) {
          drop_pairs = true;
          for (auto& a : model.agents) {
            if (!std::binary_search(hidden.begin(), hidden.end(), a.agent)) continue;
            std::erase_if(a.covers, [&](const auto& c) { return c.sender == m.agent; });
          }
        } else {
          drop_pairs = true;
        }
      },
      d.utility.payload);
  if (drop_pairs && !hidden.empty()) {
    std::erase_if(d.allowed, [&](const auto& p) {
      return p.second == m.agent && std::binary_search(hidden.begin(), hidden.end(), p.first);
    });
  }
  Instance reported(std::move(d));
  ConditionChecker{instance, reported, m.agent}.Run();
  return reported;
}

std::vector<MisreportViolation> StrategyproofnessFuzz(const Instance& instance,
                                                      const Mechanism& mechanism,
                                                      int trials, std::uint64_t seed) {
  const int n = instance.n();
  std::vector<MisreportViolation> out;
  if (n == 0 || trials <= 0) return out;
  const std::vector<double> truthful =
      Evaluate(instance, mechanism(instance)).per_agent_utility;
  for (int t = 0; t < trials; ++t) {
    KeyedRng rng(Mix64(seed) ^ Mix64(static_cast<std::uint64_t>(t) + 1));
    Misreport m;
    m.agent = static_cast<AgentId>(rng.Below(n));
    const int kind = static_cast<int>(rng.Below(3));
    if (kind != 1) m.utility_factor = rng.Uniform();
    if (kind != 0) {
      for (AgentId j = 0; j < n; ++j) {
        if (instance.Permitted(j, m.agent) && rng.Below(2) == 0) m.hide_from.push_back(j);
      }
    }
    const Instance reported = ApplyMisreport(instance, m);
    const double perceived =
        Evaluate(reported, mechanism(reported)).per_agent_utility[m.agent];
    if (perceived > truthful[m.agent] + kEqualityTol) {
      out.push_back({m.agent, m, truthful[m.agent], perceived});
    }
  }
  return out;
}

Mechanism CycleCancelingMechanism() {
  return [](const Instance& instance) { return GreedyCycleCanceling(instance).first; };
}

Mechanism GreedyMatchingMechanism() {
  return [](const Instance& instance) { return GreedyMatching(instance); };
}

}  // namespace dexchange
