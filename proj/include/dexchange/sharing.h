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

// Utility shares h_ij(S): how much of u_i(S) is credited to each sender j.
// Every rule here is efficient, i.e. the shares of S sum to u_i(S).

#ifndef DEXCHANGE_SHARING_H_
#define DEXCHANGE_SHARING_H_

#include <cstdint>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "dexchange/common.h"
#include "dexchange/instance.h"

namespace dexchange {

// Shares are returned aligned with the (canonical) sender list.

// Average marginal contribution over all orderings of S, computed with the
// subset-weighted sum (2^|S| utility evaluations). Coverage models use the
// closed form sum_{e covered by j} w_e / c_e(S), valid for any |S|.
// Throws std::invalid_argument when |S| > kMaxExactShapleySenders for other
// models; use ShapleySampled there.
std::vector<double> ShapleyExact(const Instance& instance, AgentId agent,
                                 std::span<const AgentId> senders);

// Average marginal over `permutations` orderings drawn from a stream keyed by
// (seed, agent, S). Deterministic and independent of call order.
std::vector<double> ShapleySampled(const Instance& instance, AgentId agent,
                                   std::span<const AgentId> senders,
                                   int permutations, std::uint64_t seed);

// h_ij(S) = w_ij / sum_k w_ik * u_i(S). Throws "undefined proportional share"
// when the weights vanish while u_i(S) > 0.
std::vector<double> ProportionalShares(const Instance& instance, AgentId agent,
                                       std::span<const AgentId> senders,
                                       std::span<const double> weights,
                                       std::span<const double> fractions = {});

// Weights w_ij for the instance's proportional rule (explicit, u_i({j}), or
// s_ij scaled by the transferred fraction).
std::vector<double> ProportionalWeights(const Instance& instance, AgentId agent,
                                        std::span<const AgentId> senders,
                                        std::span<const double> fractions = {});

// Shares under the instance's own sharing rule.
std::vector<double> Shares(const Instance& instance, AgentId agent,
                           std::span<const AgentId> senders,
                           std::span<const double> fractions = {});

// True when the instance's rule is cross-monotone on submodular utilities.
bool IsCrossMonotoneRule(const Instance& instance);

struct CrossMonotonicityViolation {
  AgentId agent = 0;
  AgentId sender = 0;
  Subset smaller;
  Subset larger;
  double share_smaller = 0.0;
  double share_larger = 0.0;
};

// Scans pairs T subset-of S of agent's permitted senders and reports every
// sender j in T with h_ij(T) < h_ij(S) - 1e-9. Exhaustive when the number of
// (T, S) pairs is at most `budget`, otherwise `budget` seeded random pairs.
std::vector<CrossMonotonicityViolation> CrossMonotonicityAudit(
    const Instance& instance, AgentId agent, std::int64_t budget);

// Thread-safe memo of Shares(). Results are identical to direct calls.
class ShareCache {
 public:
  explicit ShareCache(const Instance& instance) : instance_(&instance) {}

  std::vector<double> Get(AgentId agent, std::span<const AgentId> senders,
                          std::span<const double> fractions = {});
  std::size_t size() const;

 private:
  struct Key {
    AgentId agent;
    Subset senders;
    std::vector<double> fractions;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  const Instance* instance_;
  mutable std::mutex mu_;
  std::unordered_map<Key, std::vector<double>, KeyHash> memo_;
};

}  // namespace dexchange

#endif  // DEXCHANGE_SHARING_H_
