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

#include "dexchange/common.h"

#include <algorithm>

namespace dexchange {

bool IsCanonical(std::span<const AgentId> subset) {
  for (std::size_t k = 1; k < subset.size(); ++k) {
    if (subset[k - 1] >= subset[k]) return false;
  }
  return true;
}

Subset Canonicalize(Subset subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  return subset;
}

std::string SubsetToString(std::span<const AgentId> subset) {
  std::string out = "{";
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k > 0) out += ",";
    out += std::to_string(subset[k]);
  }
  return out + "}";
}

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t HashSubset(std::span<const AgentId> subset) {
  std::uint64_t h = 0x51ed270b27ULL + subset.size();
  for (AgentId a : subset) h = Mix64(h ^ static_cast<std::uint64_t>(a));
  return h;
}

std::uint64_t KeyedRng::Next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t KeyedRng::Below(std::uint64_t bound) {
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~0ULL - (~0ULL % bound);
  std::uint64_t r;
  do {
    r = Next();
  } while (r >= limit);
  return r % bound;
}

double KeyedRng::Uniform() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

}  // namespace dexchange
