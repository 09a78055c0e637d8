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

#ifndef DEXCHANGE_UTILITY_H_
#define DEXCHANGE_UTILITY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dexchange/common.h"
#include "dexchange/instance.h"

namespace dexchange {

// Evaluates u_i on a growing sender set. Senders are local indices into
// instance.senders(agent). Each model keeps just enough running state for
// Add() to be cheap, which makes permutation sampling linear in |S|.
class UtilityAccumulator {
 public:
  UtilityAccumulator(const Instance& instance, AgentId agent);

  void Reset();
  // `fraction` other than 1 is only meaningful for continuous models.
  void Add(int local, double fraction = 1.0);
  double Value() const;

 private:
  const Instance* instance_;
  AgentId agent_;
  const AgentView* view_;
  std::uint64_t mask_ = 0;
  double total_size_ = 0.0;
  std::vector<double> extra_samples_;
  std::vector<int> cover_count_;
  double covered_ = 0.0;
};

// Maps a canonical sender set to local indices; throws std::invalid_argument
// if the set is not canonical or names a sender that is not permitted.
std::vector<int> ToLocal(const Instance& instance, AgentId agent,
                         std::span<const AgentId> senders);

// u_i(S) in normalized units.
double Utility(const Instance& instance, AgentId agent,
               std::span<const AgentId> senders);

// u_i(y) where each sender in `senders` contributes fraction y.
double UtilityFractional(const Instance& instance, AgentId agent,
                         std::span<const AgentId> senders,
                         std::span<const double> fractions);

// u_i(all permitted senders).
double FullUtility(const Instance& instance, AgentId agent);

// u_i({j}).
double SingletonUtility(const Instance& instance, AgentId receiver,
                        AgentId sender);

}  // namespace dexchange

#endif  // DEXCHANGE_UTILITY_H_
