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

#include "dexchange/exact.h"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

constexpr double kDropWeight = 1e-13;
constexpr std::size_t kMaxCoalitions = 5000;

struct ColumnData {
  Column column;
  double utility = 0.0;
  std::vector<double> shares;
};

std::vector<ColumnData> Prepare(const Instance& instance, const std::vector<Column>& columns,
                                ShareCache* cache) {
  std::map<std::tuple<AgentId, Subset, std::vector<double>>, int> seen;
  std::vector<ColumnData> out;
  for (const Column& c : columns) {
    if (c.senders.empty()) continue;
    if (!seen.emplace(std::tuple{c.agent, c.senders, c.fractions}, 1).second) continue;
    ColumnData d;
    d.column = Column{c.agent, c.senders, 0.0, c.fractions};
    d.utility = UtilityFractional(instance, c.agent, c.senders, c.fractions);
    d.shares = cache ? cache->Get(c.agent, c.senders, c.fractions)
                     : Shares(instance, c.agent, c.senders, c.fractions);
    out.push_back(std::move(d));
  }
  return out;
}

// Adds mass rows and both balance rows for the agents in `agents`.
void AddExchangeRows(const std::vector<ColumnData>& cols, const std::vector<AgentId>& agents,
                     int n, double eps, const std::vector<double>& deltas,
                     const std::vector<double>& gammas, LinearProgram* lp) {
  std::vector<std::vector<std::pair<int, double>>> mass(n), balance(n);
  std::vector<std::map<int, double>> acc(n);
  for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
    const ColumnData& d = cols[c];
    mass[d.column.agent].emplace_back(c, 1.0);
    for (std::size_t k = 0; k < d.column.senders.size(); ++k) {
      acc[d.column.agent][c] += d.shares[k];
      acc[d.column.senders[k]][c] -= d.shares[k];
    }
  }
  for (AgentId i : agents) {
    if (!mass[i].empty()) lp->AddRow(mass[i], LinearProgram::Sense::kLessEqual, 1.0);
    std::vector<std::pair<int, double>> pos, neg;
    for (const auto& [c, v] : acc[i]) {
      if (v == 0.0) continue;
      pos.emplace_back(c, v);
      neg.emplace_back(c, -v);
    }
    if (pos.empty()) continue;
    const double up = eps + (gammas.empty() ? 0.0 : gammas[i]);
    const double down = eps + (deltas.empty() ? 0.0 : deltas[i]);
    lp->AddRow(std::move(pos), LinearProgram::Sense::kLessEqual, up);
    lp->AddRow(std::move(neg), LinearProgram::Sense::kLessEqual, down);
  }
}

Subset Intersect(std::span<const AgentId> senders, const std::vector<char>& inside) {
  Subset s;
  for (AgentId j : senders) {
    if (inside[j]) s.push_back(j);
  }
  return s;
}

std::vector<Column> SubsetColumns(AgentId agent, const Subset& pool) {
  const int k = static_cast<int>(pool.size());
  if (k > kMaxExactShapleySenders) {
    throw std::invalid_argument("exact LP limited to " +
                                std::to_string(kMaxExactShapleySenders) +
                                " senders per agent");
  }
  std::vector<Column> out;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    Column c;
    c.agent = agent;
    for (int b = 0; b < k; ++b) {
      if (mask & (1u << b)) c.senders.push_back(pool[b]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

ColumnLpResult MaxWelfareOverColumns(const Instance& instance,
                                     const std::vector<Column>& columns,
                                     const ColumnLpOptions& options, ShareCache* cache) {
  const int n = instance.n();
  if (options.balance_eps < 0.0) throw std::invalid_argument("balance slack must be non-negative");
  const std::vector<ColumnData> cols = Prepare(instance, columns, cache);
  LinearProgram lp;
  for (const ColumnData& d : cols) lp.AddVariable(d.utility);
  std::vector<AgentId> agents(n);
  for (int i = 0; i < n; ++i) agents[i] = i;
  AddExchangeRows(cols, agents, n, options.balance_eps, options.deltas, options.gammas, &lp);
  if (!options.utility_floor.empty()) {
    if (static_cast<int>(options.utility_floor.size()) != n) {
      throw std::invalid_argument("utility floors need one entry per agent");
    }
    for (int i = 0; i < n; ++i) {
      if (!options.utility_floor[i]) continue;
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (cols[c].column.agent == i) row.emplace_back(c, cols[c].utility);
      }
      lp.AddRow(std::move(row), LinearProgram::Sense::kGreaterEqual, *options.utility_floor[i]);
    }
  }
  const LpResult r = SolveLp(lp);
  ColumnLpResult out;
  out.status = r.status;
  out.solution.n = n;
  out.solution.deltas = options.deltas;
  out.solution.gammas = options.gammas;
  if (!r.ok()) return out;
  std::vector<double> mass(n, 0.0);
  for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
    if (r.x[c] <= kDropWeight) continue;
    Column col = cols[c].column;
    col.weight = std::min(1.0, r.x[c]);
    mass[col.agent] += col.weight;
    out.welfare += col.weight * cols[c].utility;
    out.solution.columns.push_back(std::move(col));
  }
  out.nonzero_columns = static_cast<int>(out.solution.columns.size());
  return out;
}

std::vector<Column> EnumerateColumns(const Instance& instance) {
  std::vector<Column> out;
  for (int i = 0; i < instance.n(); ++i) {
    const std::span<const AgentId> s = instance.senders(i);
    std::vector<Column> mine = SubsetColumns(i, Subset(s.begin(), s.end()));
    out.insert(out.end(), std::make_move_iterator(mine.begin()),
               std::make_move_iterator(mine.end()));
  }
  return out;
}

ExactWelfare ExactWelfareLp(const Instance& instance, double relax_eps,
                            const std::vector<std::optional<double>>& utility_floor) {
  ColumnLpOptions options;
  options.balance_eps = relax_eps;
  options.utility_floor = utility_floor;
  ShareCache cache(instance);
  ColumnLpResult r = MaxWelfareOverColumns(instance, EnumerateColumns(instance), options, &cache);
  if (r.status != LpResult::Status::kOptimal) {
    throw std::runtime_error("exact welfare LP failed: " + StatusName(r.status));
  }
  return ExactWelfare{std::move(r.solution), r.welfare, r.nonzero_columns};
}

std::vector<BlockingCoalition> ExactCoreAudit(const Instance& instance,
                                              const ExchangeSolution& solution,
                                              const CoreAuditOptions& options) {
  const int n = instance.n();
  if (options.max_coalition < 2) throw std::invalid_argument("coalitions need at least 2 agents");
  if (!(options.factor >= 1.0)) throw std::invalid_argument("core factor must be >= 1");
  // Count coalitions before doing any work.
  std::size_t count = 0;
  {
    double binom = 1.0;
    for (int s = 1; s <= std::min(options.max_coalition, n); ++s) {
      binom = binom * (n - s + 1) / s;
      if (s >= 2) count += static_cast<std::size_t>(binom + 0.5);
      if (count > kMaxCoalitions) {
        throw std::invalid_argument("too many coalitions to enumerate");
      }
    }
  }
  const std::vector<double> current = Evaluate(instance, solution).per_agent_utility;
  ShareCache cache(instance);
  std::vector<BlockingCoalition> out;
  std::vector<char> inside(n, 0);

  auto audit = [&](const std::vector<AgentId>& members) {
    for (AgentId i : members) inside[i] = 1;
    bool promising = true;
    std::vector<Column> columns;
    for (AgentId i : members) {
      const Subset pool = Intersect(instance.senders(i), inside);
      const double best = pool.empty() ? 0.0 : Utility(instance, i, pool);
      if (best <= options.factor * current[i] + options.margin) {
        promising = false;
        break;
      }
      std::vector<Column> mine = SubsetColumns(i, pool);
      columns.insert(columns.end(), mine.begin(), mine.end());
    }
    for (AgentId i : members) inside[i] = 0;
    if (!promising) return;

    const std::vector<ColumnData> cols = Prepare(instance, columns, &cache);
    LinearProgram lp;
    for (std::size_t c = 0; c < cols.size(); ++c) lp.AddVariable(0.0);
    const int t = lp.AddVariable(1.0);
    AddExchangeRows(cols, members, n, options.balance_eps, {}, {}, &lp);
    double shift = 0.0;
    for (AgentId i : members) shift = std::max(shift, options.factor * current[i]);
    shift += 1.0;
    for (AgentId i : members) {
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        if (cols[c].column.agent == i) row.emplace_back(c, -cols[c].utility);
      }
      row.emplace_back(t, 1.0);
      lp.AddRow(std::move(row), LinearProgram::Sense::kLessEqual,
                shift - options.factor * current[i]);
    }
    const LpResult r = SolveLp(lp);
    if (!r.ok()) {
      throw std::runtime_error("coalition LP failed: " + StatusName(r.status));
    }
    const double gain = r.x[t] - shift;
    if (gain <= options.margin) return;
    BlockingCoalition b;
    b.members = members;
    b.improvement = gain;
    b.deviation_utility.assign(members.size(), 0.0);
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
      const auto it = std::lower_bound(members.begin(), members.end(), cols[c].column.agent);
      b.deviation_utility[it - members.begin()] += r.x[c] * cols[c].utility;
    }
    out.push_back(std::move(b));
  };

  for (int size = 2; size <= std::min(options.max_coalition, n); ++size) {
    std::vector<AgentId> members(size);
    for (int a = 0; a < size; ++a) members[a] = a;
    while (true) {
      audit(members);
      int pos = size - 1;
      while (pos >= 0 && members[pos] == n - size + pos) --pos;
      if (pos < 0) break;
      ++members[pos];
      for (int a = pos + 1; a < size; ++a) members[a] = members[a - 1] + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const BlockingCoalition& a, const BlockingCoalition& b) {
    return a.members < b.members;
  });
  return out;
}

}  // namespace dexchange
