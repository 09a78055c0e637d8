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

#include "dexchange/instance.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

[[noreturn]] void Fail(const std::string& what) {
  throw std::invalid_argument(what);
}

void CheckMatrix(const std::vector<std::vector<double>>& m, int n,
                 const char* name) {
  if (static_cast<int>(m.size()) != n) {
    Fail(std::string(name) + " must be an n x n matrix");
  }
  for (const auto& row : m) {
    if (static_cast<int>(row.size()) != n) {
      Fail(std::string(name) + " must be an n x n matrix");
    }
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        Fail(std::string(name) + " entries must be finite and non-negative");
      }
    }
  }
}

}  // namespace

Instance::Instance(InstanceData data) {
  std::sort(data.allowed.begin(), data.allowed.end());
  data.allowed.erase(std::unique(data.allowed.begin(), data.allowed.end()),
                     data.allowed.end());
  data_ = std::make_shared<const InstanceData>(std::move(data));
  const int n = data_->n;
  if (n < 1) Fail("instance needs at least one agent");
  senders_.assign(n, {});
  local_.assign(static_cast<std::size_t>(n) * n, -1);
  for (const auto& [i, j] : data_->allowed) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      Fail("allowed pair (" + std::to_string(i) + "," + std::to_string(j) +
           ") out of range");
    }
    if (i == j) Fail("self pair (" + std::to_string(i) + "," +
                     std::to_string(i) + ") is not allowed");
    senders_[i].push_back(j);
  }
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < senders_[i].size(); ++k) {
      local_[static_cast<std::size_t>(i) * n + senders_[i][k]] =
          static_cast<int>(k);
    }
  }
  Validate();
  BuildViews();
}

bool Instance::IsTable() const {
  return std::holds_alternative<ExplicitTableModel>(data_->utility.payload);
}
bool Instance::IsSymmetricWeighted() const {
  return std::holds_alternative<SymmetricWeightedModel>(data_->utility.payload);
}
bool Instance::IsContinuous() const {
  return std::holds_alternative<ContinuousConcaveModel>(data_->utility.payload);
}
bool Instance::IsPathVariance() const {
  return std::holds_alternative<PathVarianceModel>(data_->utility.payload);
}
bool Instance::IsCoverage() const {
  return std::holds_alternative<CoverageModel>(data_->utility.payload);
}

double Instance::Size(AgentId receiver, AgentId sender) const {
  if (const auto* m = std::get_if<SymmetricWeightedModel>(&data_->utility.payload)) {
    return m->sizes[receiver][sender];
  }
  if (const auto* m = std::get_if<ContinuousConcaveModel>(&data_->utility.payload)) {
    return m->sizes[receiver][sender];
  }
  throw std::invalid_argument("data sizes are defined only for scalar-form models");
}

void Instance::Validate() const {
  const int n = data_->n;
  const InstanceData& d = *data_;
  if (!(d.epsilon >= 0.0 && d.epsilon < 1.0)) Fail("epsilon must lie in [0, 1)");
  const UtilityModel& um = d.utility;
  if (!(um.scale > 0.0) || !std::isfinite(um.scale)) Fail("utility scale must be positive");
  if (!um.agent_scale.empty()) {
    if (static_cast<int>(um.agent_scale.size()) != n) Fail("agent_scale must have n entries");
    for (double a : um.agent_scale) {
      if (!(a >= 0.0) || !std::isfinite(a)) Fail("agent_scale entries must be non-negative");
    }
  }

  if (const auto* m = std::get_if<ExplicitTableModel>(&um.payload)) {
    std::vector<bool> seen(n, false);
    for (const auto& t : m->tables) {
      if (t.agent < 0 || t.agent >= n) Fail("table agent out of range");
      if (seen[t.agent]) Fail("duplicate table for agent " + std::to_string(t.agent));
      seen[t.agent] = true;
      if (!std::equal(t.senders.begin(), t.senders.end(), senders_[t.agent].begin(),
                      senders_[t.agent].end())) {
        Fail("table senders of agent " + std::to_string(t.agent) +
             " must equal its permitted senders");
      }
      const int k = static_cast<int>(t.senders.size());
      if (k > kMaxEnumerableSenders) Fail("explicit table has too many senders");
      if (t.values.size() != (std::size_t{1} << k)) {
        Fail("table of agent " + std::to_string(t.agent) + " needs 2^k values");
      }
      if (t.values[0] != 0.0) Fail("u_i(empty set) must be 0");
      for (std::size_t mask = 0; mask < t.values.size(); ++mask) {
        const double v = t.values[mask];
        if (!(v >= 0.0) || !std::isfinite(v)) Fail("table utilities must be finite and non-negative");
        for (int b = 0; b < k; ++b) {
          if (mask & (std::size_t{1} << b)) continue;
          if (t.values[mask | (std::size_t{1} << b)] < v - kEqualityTol) {
            Fail("table of agent " + std::to_string(t.agent) + " is not monotone");
          }
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!seen[i] && !senders_[i].empty()) {
        Fail("agent " + std::to_string(i) + " has permitted senders but no table");
      }
    }
  } else if (const auto* m = std::get_if<SymmetricWeightedModel>(&um.payload)) {
    CheckMatrix(m->sizes, n, "sizes");
    if (static_cast<int>(m->concave.size()) != n) Fail("need one concave spec per agent");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (m->sizes[i][j] > 0.0 && !Permitted(i, j)) {
          Fail("size s_" + std::to_string(i) + "," + std::to_string(j) +
               " references a pair that is not allowed");
        }
      }
    }
  } else if (const auto* m = std::get_if<ContinuousConcaveModel>(&um.payload)) {
    CheckMatrix(m->sizes, n, "sizes");
    if (static_cast<int>(m->concave.size()) != n) Fail("need one concave spec per agent");
    if (!(m->floor > 0.0)) Fail("continuous model needs a positive utility floor");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (m->sizes[i][j] > 0.0 && !Permitted(i, j)) {
          Fail("size s_" + std::to_string(i) + "," + std::to_string(j) +
               " references a pair that is not allowed");
        }
      }
    }
  } else if (const auto* m = std::get_if<PathVarianceModel>(&um.payload)) {
    const std::size_t edges = m->edge_variance.size();
    if (m->edge_class.size() != edges) Fail("edge_class must cover every edge");
    for (double v : m->edge_variance) {
      if (!(v >= 0.0 && v <= 1.0)) Fail("edge variances must lie in [0, 1]");
    }
    for (int c : m->edge_class) {
      if (c < 0) Fail("edge classes must be non-negative");
    }
    if (static_cast<int>(m->paths.size()) != n || static_cast<int>(m->samples.size()) != n) {
      Fail("path-variance model needs one path and one sample count per agent");
    }
    for (int z : m->samples) {
      if (z < 1) Fail("sample counts must be at least 1");
    }
    for (const auto& p : m->paths) {
      for (int e : p) {
        if (e < 0 || static_cast<std::size_t>(e) >= edges) Fail("path edge out of range");
      }
    }
  } else if (const auto* m = std::get_if<CoverageModel>(&um.payload)) {
    std::vector<bool> seen(n, false);
    for (const auto& a : m->agents) {
      if (a.agent < 0 || a.agent >= n) Fail("coverage agent out of range");
      if (seen[a.agent]) Fail("duplicate coverage entry");
      seen[a.agent] = true;
      for (double w : a.element_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) Fail("element weights must be non-negative");
      }
      std::vector<bool> sender_seen(n, false);
      for (const auto& c : a.covers) {
        if (c.sender < 0 || c.sender >= n || !Permitted(a.agent, c.sender)) {
          Fail("coverage sender is not a permitted sender");
        }
        if (sender_seen[c.sender]) Fail("duplicate coverage sender");
        sender_seen[c.sender] = true;
        for (int e : c.elements) {
          if (e < 0 || static_cast<std::size_t>(e) >= a.element_weights.size()) {
            Fail("covered element out of range");
          }
        }
      }
    }
  }

  const SharingRuleSpec& s = d.sharing;
  if (s.permutations < 1) Fail("permutation count must be at least 1");
  if (s.kind == SharingRuleSpec::Kind::kProportional) {
    if (s.weight_rule == SharingRuleSpec::WeightRule::kExplicit) {
      CheckMatrix(s.weights, n, "proportional weights");
    }
    if (s.weight_rule == SharingRuleSpec::WeightRule::kSize && !HasScalarForm()) {
      Fail("size-proportional sharing needs a model with data sizes");
    }
  }
}

void Instance::BuildViews() {
  const int n = data_->n;
  const UtilityModel& um = data_->utility;
  views_.assign(n, AgentView{});
  for (int i = 0; i < n; ++i) {
    const double a = um.agent_scale.empty() ? 1.0 : um.agent_scale[i];
    views_[i].multiplier = a / um.scale;
  }
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ExplicitTableModel>) {
          for (const auto& t : m.tables) views_[t.agent].table = t.values;
          for (int i = 0; i < n; ++i) {
            if (views_[i].table.empty()) views_[i].table = {0.0};
          }
        } else if constexpr (std::is_same_v<M, SymmetricWeightedModel> ||
                             std::is_same_v<M, ContinuousConcaveModel>) {
          for (int i = 0; i < n; ++i) {
            views_[i].concave = &m.concave[i];
            for (AgentId j : senders_[i]) views_[i].sizes.push_back(m.sizes[i][j]);
          }
        } else if constexpr (std::is_same_v<M, PathVarianceModel>) {
          // Per-class edge counts of every agent's path.
          int classes = 0;
          for (int c : m.edge_class) classes = std::max(classes, c + 1);
          std::vector<std::vector<int>> class_count(n, std::vector<int>(classes, 0));
          for (int j = 0; j < n; ++j) {
            for (int e : m.paths[j]) ++class_count[j][m.edge_class[e]];
          }
          for (int i = 0; i < n; ++i) {
            AgentView& v = views_[i];
            v.own_samples = m.samples[i];
            for (int e : m.paths[i]) {
              v.path_variance.push_back(m.edge_variance[e]);
              v.baseline_variance += m.edge_variance[e] / m.samples[i];
            }
            for (AgentId j : senders_[i]) {
              std::vector<double> add;
              add.reserve(m.paths[i].size());
              for (int e : m.paths[i]) {
                add.push_back(static_cast<double>(m.samples[j]) *
                              class_count[j][m.edge_class[e]]);
              }
              v.donated.push_back(std::move(add));
            }
          }
        } else if constexpr (std::is_same_v<M, CoverageModel>) {
          for (const auto& ac : m.agents) {
            AgentView& v = views_[ac.agent];
            v.element_weights = ac.element_weights;
            v.covers.assign(senders_[ac.agent].size(), {});
            for (const auto& c : ac.covers) {
              v.covers[LocalIndex(ac.agent, c.sender)] = c.elements;
            }
          }
          for (int i = 0; i < n; ++i) {
            if (views_[i].covers.size() != senders_[i].size()) {
              views_[i].covers.assign(senders_[i].size(), {});
            }
          }
        }
      },
      um.payload);
}

double MaxFullUtility(const Instance& instance) {
  double best = 0.0;
  for (int i = 0; i < instance.n(); ++i) best = std::max(best, FullUtility(instance, i));
  return best;
}

std::pair<Instance, double> NormalizeInstance(const Instance& instance) {
  const double top = MaxFullUtility(instance);
  if (!(top > 0.0) || !std::isfinite(top)) throw std::invalid_argument("degenerate instance");
  if (top == 1.0) return {instance, 1.0};
  InstanceData data = instance.data();
  data.utility.scale *= top;
  if (auto* m = std::get_if<ContinuousConcaveModel>(&data.utility.payload)) {
    m->floor /= top;
  }
  return {Instance(std::move(data)), top};
}

Instance WithSharing(const Instance& instance, SharingRuleSpec sharing) {
  InstanceData data = instance.data();
  data.sharing = std::move(sharing);
  return Instance(std::move(data));
}

Instance WithEpsilon(const Instance& instance, double epsilon) {
  InstanceData data = instance.data();
  data.epsilon = epsilon;
  return Instance(std::move(data));
}

}  // namespace dexchange
