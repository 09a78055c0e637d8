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

#include "dexchange/utility.h"

#include <stdexcept>
#include <string>

namespace dexchange {

UtilityAccumulator::UtilityAccumulator(const Instance& instance, AgentId agent)
    : instance_(&instance), agent_(agent), view_(&instance.view(agent)) {
  Reset();
}

void UtilityAccumulator::Reset() {
  mask_ = 0;
  total_size_ = 0.0;
  covered_ = 0.0;
  if (instance_->IsPathVariance()) {
    extra_samples_.assign(view_->path_variance.size(), 0.0);
  } else if (instance_->IsCoverage()) {
    cover_count_.assign(view_->element_weights.size(), 0);
  }
}

void UtilityAccumulator::Add(int local, double fraction) {
  if (fraction != 1.0 && !instance_->IsContinuous()) {
    throw std::invalid_argument("fractional transfers need a continuous model");
  }
  if (instance_->IsTable()) {
    mask_ |= std::uint64_t{1} << local;
  } else if (instance_->HasScalarForm()) {
    total_size_ += view_->sizes[local] * fraction;
  } else if (instance_->IsPathVariance()) {
    const auto& add = view_->donated[local];
    for (std::size_t e = 0; e < add.size(); ++e) extra_samples_[e] += add[e];
  } else if (instance_->IsCoverage()) {
    for (int e : view_->covers[local]) {
      if (cover_count_[e]++ == 0) covered_ += view_->element_weights[e];
    }
  }
}

double UtilityAccumulator::Value() const {
  double raw = 0.0;
  if (instance_->IsTable()) {
    raw = view_->table[mask_];
  } else if (instance_->HasScalarForm()) {
    raw = (*view_->concave)(total_size_);
  } else if (instance_->IsPathVariance()) {
    const double z = view_->own_samples;
    for (std::size_t e = 0; e < extra_samples_.size(); ++e) {
      if (extra_samples_[e] == 0.0) continue;
      const double s2 = view_->path_variance[e];
      raw += s2 / z - s2 / (z + extra_samples_[e]);
    }
  } else if (instance_->IsCoverage()) {
    raw = covered_;
  }
  return raw * view_->multiplier;
}

std::vector<int> ToLocal(const Instance& instance, AgentId agent,
                         std::span<const AgentId> senders) {
  if (agent < 0 || agent >= instance.n()) {
    throw std::invalid_argument("agent out of range");
  }
  if (!IsCanonical(senders)) {
    throw std::invalid_argument("sender set must be sorted without duplicates");
  }
  std::vector<int> local;
  local.reserve(senders.size());
  for (AgentId j : senders) {
    const int k = (j >= 0 && j < instance.n()) ? instance.LocalIndex(agent, j) : -1;
    if (k < 0) {
      throw std::invalid_argument("sender " + std::to_string(j) +
                                  " is not permitted for agent " +
                                  std::to_string(agent));
    }
    local.push_back(k);
  }
  return local;
}

double Utility(const Instance& instance, AgentId agent,
               std::span<const AgentId> senders) {
  UtilityAccumulator acc(instance, agent);
  for (int k : ToLocal(instance, agent, senders)) acc.Add(k);
  return acc.Value();
}

double UtilityFractional(const Instance& instance, AgentId agent,
                         std::span<const AgentId> senders,
                         std::span<const double> fractions) {
  if (fractions.empty()) return Utility(instance, agent, senders);
  if (fractions.size() != senders.size()) {
    throw std::invalid_argument("one fraction per sender is required");
  }
  const std::vector<int> local = ToLocal(instance, agent, senders);
  UtilityAccumulator acc(instance, agent);
  for (std::size_t k = 0; k < local.size(); ++k) {
    if (!(fractions[k] >= 0.0 && fractions[k] <= 1.0)) {
      throw std::invalid_argument("fractions must lie in [0, 1]");
    }
    acc.Add(local[k], fractions[k]);
  }
  return acc.Value();
}

double FullUtility(const Instance& instance, AgentId agent) {
  UtilityAccumulator acc(instance, agent);
  for (std::size_t k = 0; k < instance.senders(agent).size(); ++k) {
    acc.Add(static_cast<int>(k));
  }
  return acc.Value();
}

double SingletonUtility(const Instance& instance, AgentId receiver,
                        AgentId sender) {
  const int k = instance.LocalIndex(receiver, sender);
  if (k < 0) {
    throw std::invalid_argument("sender " + std::to_string(sender) +
                                " is not permitted for agent " +
                                std::to_string(receiver));
  }
  UtilityAccumulator acc(instance, receiver);
  acc.Add(k);
  return acc.Value();
}

}  // namespace dexchange
