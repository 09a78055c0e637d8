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

#ifndef DEXCHANGE_COMMON_H_
#define DEXCHANGE_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dexchange {

// Agents are dense indices in [0, n).
using AgentId = int;

// A set of senders, always stored as a strictly increasing list of agent ids.
using Subset = std::vector<AgentId>;

// Absolute tolerance for identities that hold exactly in real arithmetic
// (efficiency of shares, linearity of evaluation, recomputed residuals).
inline constexpr double kEqualityTol = 1e-9;

// Upper bound on the number of permitted senders for which subset-indexed
// data (explicit tables, brute-force enumeration) is materialized.
inline constexpr int kMaxEnumerableSenders = 20;

// Largest set for which exact Shapley values are computed by subset sums.
inline constexpr int kMaxExactShapleySenders = 12;

bool IsCanonical(std::span<const AgentId> subset);

// Sorts and deduplicates.
Subset Canonicalize(Subset subset);

std::string SubsetToString(std::span<const AgentId> subset);

std::uint64_t HashSubset(std::span<const AgentId> subset);

// SplitMix64 finalizer; used to derive independent keyed streams.
std::uint64_t Mix64(std::uint64_t x);

// Small counter-based generator. Streams are fully determined by the key,
// which keeps sampled quantities independent of evaluation order.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t key) : state_(Mix64(key)) {}
  std::uint64_t Next();
  // Uniform in [0, bound).
  std::uint64_t Below(std::uint64_t bound);
  // Uniform in [0, 1).
  double Uniform();

 private:
  std::uint64_t state_;
};

}  // namespace dexchange

#endif  // DEXCHANGE_COMMON_H_
