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

// Problem model for data exchange: agents, the permitted-transfer graph, the
// utility model, and the rule that splits a receiver's utility among its
// senders.

#ifndef DEXCHANGE_INSTANCE_H_
#define DEXCHANGE_INSTANCE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "dexchange/common.h"
#include "dexchange/concave.h"

namespace dexchange {

// u_i(S) given as a table over all subsets of i's permitted senders.
struct ExplicitTableModel {
  struct AgentTable {
    AgentId agent = 0;
    // Must equal the permitted senders of `agent`, sorted.
    std::vector<AgentId> senders;
    // values[mask], bit k of mask selecting senders[k]. values[0] == 0.
    std::vector<double> values;
  };
  std::vector<AgentTable> tables;
};

// u_i(S) = f_i(sum_{j in S} s_ij).
struct SymmetricWeightedModel {
  std::vector<std::vector<double>> sizes;  // n x n, sizes[i][j] = s_ij
  std::vector<ConcaveSpec> concave;        // one per agent
};

// Same scalar form, but senders may contribute fractions y_ij in [0, 1].
// `floor` is the positivity bound on u_i at any unit coordinate vector.
struct ContinuousConcaveModel {
  std::vector<std::vector<double>> sizes;
  std::vector<ConcaveSpec> concave;
  double floor = 0.0;
};

// Agents estimate the mean delay of each edge on their path. Utility is the
// reduction of the summed estimator variance obtained from donated samples.
// Edges in one correlation class share a delay distribution, so a donor's
// samples on any edge of the class count for every edge of that class.
struct PathVarianceModel {
  std::vector<double> edge_variance;    // sigma_e^2 in [0, 1]
  std::vector<int> edge_class;          // correlation class of each edge
  std::vector<std::vector<int>> paths;  // edge ids, one path per agent
  std::vector<int> samples;             // z^(i) >= 1 per agent
};

// Weighted coverage: each sender covers a set of the receiver's elements and
// u_i(S) is the total weight covered by S. Used by the X3C construction.
struct CoverageModel {
  struct SenderCover {
    AgentId sender = 0;
    std::vector<int> elements;
  };
  struct AgentCoverage {
    AgentId agent = 0;
    std::vector<double> element_weights;
    std::vector<SenderCover> covers;
  };
  std::vector<AgentCoverage> agents;
};

using UtilityPayload =
    std::variant<ExplicitTableModel, SymmetricWeightedModel, PathVarianceModel,
                 CoverageModel, ContinuousConcaveModel>;

struct UtilityModel {
  UtilityPayload payload;
  // Reported utility is raw * agent_scale[i] / scale.
  double scale = 1.0;
  std::vector<double> agent_scale;  // empty means all ones
};

struct SharingRuleSpec {
  enum class Kind { kShapleyExact, kShapleySampled, kProportional };
  enum class WeightRule { kSingleton, kSize, kExplicit };

  Kind kind = Kind::kShapleyExact;
  int permutations = 10;
  std::uint64_t seed = 0;
  WeightRule weight_rule = WeightRule::kSingleton;
  std::vector<std::vector<double>> weights;  // n x n when kExplicit
};

struct InstanceData {
  int n = 0;
  // (receiver, sender) pairs along which data may flow.
  std::vector<std::pair<AgentId, AgentId>> allowed;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
  UtilityModel utility;
  SharingRuleSpec sharing;
};

// Per-receiver data laid out by local sender index (position in senders()).
struct AgentView {
  double multiplier = 1.0;  // agent_scale / scale
  std::vector<double> table;  // ExplicitTable
  std::vector<double> sizes;  // Symmetric / Continuous
  const ConcaveSpec* concave = nullptr;
  // PathVariance: variance and own sample count per path edge, and the
  // samples each local sender adds to each path edge.
  std::vector<double> path_variance;
  double own_samples = 0.0;
  std::vector<std::vector<double>> donated;
  double baseline_variance = 0.0;
  // Coverage: element weights and elements covered per local sender.
  std::vector<double> element_weights;
  std::vector<std::vector<int>> covers;
};

// Validated, immutable instance. Copies share the derived caches.
class Instance {
 public:
  // Throws std::invalid_argument on any violated invariant.
  explicit Instance(InstanceData data);

  const InstanceData& data() const { return *data_; }
  int n() const { return data_->n; }
  double epsilon() const { return data_->epsilon; }
  const UtilityModel& utility_model() const { return data_->utility; }
  const SharingRuleSpec& sharing() const { return data_->sharing; }

  std::span<const AgentId> senders(AgentId i) const { return senders_[i]; }
  // Position of `sender` in senders(receiver), or -1 when not permitted.
  int LocalIndex(AgentId receiver, AgentId sender) const {
    return local_[static_cast<std::size_t>(receiver) * data_->n + sender];
  }
  bool Permitted(AgentId receiver, AgentId sender) const {
    return LocalIndex(receiver, sender) >= 0;
  }
  const AgentView& view(AgentId i) const { return views_[i]; }

  bool IsTable() const;
  bool IsSymmetricWeighted() const;
  bool IsContinuous() const;
  bool IsPathVariance() const;
  bool IsCoverage() const;
  // Symmetric-weighted or continuous, i.e. u_i = f_i(sum s_ij y_ij).
  bool HasScalarForm() const { return IsSymmetricWeighted() || IsContinuous(); }

  // s_ij for scalar-form models.
  double Size(AgentId receiver, AgentId sender) const;

  // v_0(i) for path-variance models, in raw units.
  double BaselineVariance(AgentId i) const { return views_[i].baseline_variance; }

 private:
  void Validate() const;
  void BuildViews();

  std::shared_ptr<const InstanceData> data_;
  std::vector<std::vector<AgentId>> senders_;
  std::vector<int> local_;
  std::vector<AgentView> views_;
};

// Rescales so that max_i u_i(all permitted senders) = 1. Returns the new
// instance and the divisor applied; raw numbers are normalized * divisor.
// Throws std::invalid_argument("degenerate instance") when all utilities
// vanish.
std::pair<Instance, double> NormalizeInstance(const Instance& instance);

// max_i u_i(senders(i)) in the instance's current units.
double MaxFullUtility(const Instance& instance);

// Returns a copy of the data with a different sharing rule / epsilon.
Instance WithSharing(const Instance& instance, SharingRuleSpec sharing);
Instance WithEpsilon(const Instance& instance, double epsilon);

}  // namespace dexchange

#endif  // DEXCHANGE_INSTANCE_H_
