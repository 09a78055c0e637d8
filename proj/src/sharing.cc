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

#include "dexchange/sharing.h"

#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

std::vector<double> CoverageShapley(const Instance& instance, AgentId agent,
                                    const std::vector<int>& local) {
  const AgentView& v = instance.view(agent);
  std::vector<int> count(v.element_weights.size(), 0);
  for (int k : local) {
    for (int e : v.covers[k]) ++count[e];
  }
  std::vector<double> shares(local.size(), 0.0);
  for (std::size_t a = 0; a < local.size(); ++a) {
    for (int e : v.covers[local[a]]) {
      shares[a] += v.element_weights[e] / count[e];
    }
    shares[a] *= v.multiplier;
  }
  return shares;
}

}  // namespace

std::vector<double> ShapleyExact(const Instance& instance, AgentId agent,
                                 std::span<const AgentId> senders) {
  const std::vector<int> local = ToLocal(instance, agent, senders);
  if (instance.IsCoverage()) return CoverageShapley(instance, agent, local);
  const int s = static_cast<int>(local.size());
  if (s > kMaxExactShapleySenders) {
    throw std::invalid_argument(
        "exact Shapley limited to " + std::to_string(kMaxExactShapleySenders) +
        " senders; use sampled Shapley for |S| = " + std::to_string(s));
  }
  const std::uint32_t full = (1u << s);
  std::vector<double> u(full);
  UtilityAccumulator acc(instance, agent);
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    acc.Reset();
    for (int b = 0; b < s; ++b) {
      if (mask & (1u << b)) acc.Add(local[b]);
    }
    u[mask] = acc.Value();
  }
  // weight[k] = k! (s-k-1)! / s! for a coalition W of size k not holding j.
  std::vector<double> weight(s, 0.0);
  for (int k = 0; k < s; ++k) {
    double w = 1.0 / s;
    // 1 / (s * C(s-1, k))
    for (int r = 1; r <= k; ++r) w *= static_cast<double>(r) / (s - r);
    weight[k] = w;
  }
  std::vector<double> shares(s, 0.0);
  for (int j = 0; j < s; ++j) {
    const std::uint32_t bit = 1u << j;
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      total += weight[std::popcount(mask)] * (u[mask | bit] - u[mask]);
    }
    shares[j] = total;
  }
  return shares;
}

std::vector<double> ShapleySampled(const Instance& instance, AgentId agent,
                                   std::span<const AgentId> senders,
                                   int permutations, std::uint64_t seed) {
  if (permutations < 1) {
    throw std::invalid_argument("permutation count must be at least 1");
  }
  const std::vector<int> local = ToLocal(instance, agent, senders);
  const int s = static_cast<int>(local.size());
  std::vector<double> shares(s, 0.0);
  if (s == 0) return shares;
  KeyedRng rng(Mix64(seed) ^ Mix64(0xa5a5ULL + static_cast<std::uint64_t>(agent)) ^
               HashSubset(senders));
  UtilityAccumulator acc(instance, agent);
  std::vector<int> order(s);
  for (int p = 0; p < permutations; ++p) {
    std::iota(order.begin(), order.end(), 0);
    for (int k = s - 1; k > 0; --k) {
      const int r = static_cast<int>(rng.Below(static_cast<std::uint64_t>(k) + 1));
      std::swap(order[k], order[r]);
    }
    acc.Reset();
    double prev = 0.0;
    for (int pos : order) {
      acc.Add(local[pos]);
      const double cur = acc.Value();
      shares[pos] += cur - prev;
      prev = cur;
    }
  }
  for (double& h : shares) h /= permutations;
  return shares;
}

std::vector<double> ProportionalShares(const Instance& instance, AgentId agent,
                                       std::span<const AgentId> senders,
                                       std::span<const double> weights,
                                       std::span<const double> fractions) {
  if (weights.size() != senders.size()) {
    throw std::invalid_argument("one proportional weight per sender is required");
  }
  const double u = UtilityFractional(instance, agent, senders, fractions);
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("proportional weights must be non-negative");
    total += w;
  }
  std::vector<double> shares(senders.size(), 0.0);
  if (total <= 0.0) {
    if (u > 0.0) throw std::invalid_argument("undefined proportional share");
    return shares;
  }
  for (std::size_t k = 0; k < senders.size(); ++k) shares[k] = weights[k] / total * u;
  return shares;
}

std::vector<double> ProportionalWeights(const Instance& instance, AgentId agent,
                                        std::span<const AgentId> senders,
                                        std::span<const double> fractions) {
  const SharingRuleSpec& rule = instance.sharing();
  std::vector<double> w(senders.size(), 0.0);
  if (!fractions.empty() && rule.weight_rule != SharingRuleSpec::WeightRule::kSize) {
    throw std::invalid_argument("fractional transfers need size-proportional sharing");
  }
  for (std::size_t k = 0; k < senders.size(); ++k) {
    const AgentId j = senders[k];
    switch (rule.weight_rule) {
      case SharingRuleSpec::WeightRule::kSingleton:
        w[k] = SingletonUtility(instance, agent, j);
        break;
      case SharingRuleSpec::WeightRule::kSize:
        w[k] = instance.Size(agent, j) * (fractions.empty() ? 1.0 : fractions[k]);
        break;
      case SharingRuleSpec::WeightRule::kExplicit:
        w[k] = rule.weights[agent][j];
        break;
    }
  }
  return w;
}

std::vector<double> Shares(const Instance& instance, AgentId agent,
                           std::span<const AgentId> senders,
                           std::span<const double> fractions) {
  const SharingRuleSpec& rule = instance.sharing();
  if (!fractions.empty() && rule.kind != SharingRuleSpec::Kind::kProportional) {
    throw std::invalid_argument("fractional transfers need proportional sharing");
  }
  switch (rule.kind) {
    case SharingRuleSpec::Kind::kShapleyExact:
      return ShapleyExact(instance, agent, senders);
    case SharingRuleSpec::Kind::kShapleySampled:
      if (instance.IsCoverage()) return ShapleyExact(instance, agent, senders);
      return ShapleySampled(instance, agent, senders, rule.permutations, rule.seed);
    case SharingRuleSpec::Kind::kProportional:
      return ProportionalShares(instance, agent, senders,
                                ProportionalWeights(instance, agent, senders, fractions),
                                fractions);
  }
  return {};
}

bool IsCrossMonotoneRule(const Instance& instance) {
  return instance.sharing().kind != SharingRuleSpec::Kind::kProportional;
}

std::vector<CrossMonotonicityViolation> CrossMonotonicityAudit(
    const Instance& instance, AgentId agent, std::int64_t budget) {
  const std::span<const AgentId> all = instance.senders(agent);
  const int k = static_cast<int>(all.size());
  if (k > kMaxEnumerableSenders) {
    throw std::invalid_argument("cross-monotonicity audit needs an enumerable sender set");
  }
  std::map<std::uint32_t, std::vector<double>> memo;
  auto subset_of = [&](std::uint32_t mask) {
    Subset s;
    for (int b = 0; b < k; ++b) {
      if (mask & (1u << b)) s.push_back(all[b]);
    }
    return s;
  };
  auto shares_of = [&](std::uint32_t mask) -> const std::vector<double>& {
    auto it = memo.find(mask);
    if (it == memo.end()) {
      it = memo.emplace(mask, Shares(instance, agent, subset_of(mask))).first;
    }
    return it->second;
  };
  std::vector<CrossMonotonicityViolation> out;
  auto check = [&](std::uint32_t small, std::uint32_t large) {
    if (small == large || small == 0) return;
    const std::vector<double>& hs = shares_of(small);
    const std::vector<double>& hl = shares_of(large);
    int ps = 0, pl = 0;
    for (int b = 0; b < k; ++b) {
      const std::uint32_t bit = 1u << b;
      if (!(large & bit)) continue;
      if (small & bit) {
        if (hs[ps] < hl[pl] - kEqualityTol) {
          out.push_back({agent, all[b], subset_of(small), subset_of(large), hs[ps], hl[pl]});
        }
        ++ps;
      }
      ++pl;
    }
  };
  // Number of (T, S) pairs with T a subset of S is 3^k.
  double pairs = std::pow(3.0, k);
  const std::uint32_t full = k == 0 ? 0u : ((1u << k) - 1u);
  if (pairs <= static_cast<double>(budget)) {
    for (std::uint32_t large = 0; large <= full; ++large) {
      for (std::uint32_t small = large;; small = (small - 1) & large) {
        check(small, large);
        if (small == 0) break;
      }
      if (large == full) break;
    }
  } else {
    KeyedRng rng(Mix64(instance.data().seed) ^ static_cast<std::uint64_t>(agent));
    for (std::int64_t t = 0; t < budget; ++t) {
      const std::uint32_t large = static_cast<std::uint32_t>(rng.Below(std::uint64_t{full} + 1));
      const std::uint32_t small = static_cast<std::uint32_t>(rng.Below(std::uint64_t{full} + 1)) & large;
      check(small, large);
    }
  }
  return out;
}

std::size_t ShareCache::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = HashSubset(k.senders) ^ Mix64(static_cast<std::uint64_t>(k.agent));
  for (double f : k.fractions) h = Mix64(h ^ std::hash<double>{}(f));
  return static_cast<std::size_t>(h);
}

std::vector<double> ShareCache::Get(AgentId agent, std::span<const AgentId> senders,
                                    std::span<const double> fractions) {
  Key key{agent, Subset(senders.begin(), senders.end()),
          std::vector<double>(fractions.begin(), fractions.end())};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  std::vector<double> shares = Shares(*instance_, agent, senders, fractions);
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(std::move(key), shares);
  return shares;
}

std::size_t ShareCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return memo_.size();
}

}  // namespace dexchange
