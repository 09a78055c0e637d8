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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dexchange/instances.h"
#include "dexchange/solution.h"
#include "fixtures.h"

namespace dexchange {
namespace {

using testing::RandomCoverageInstance;
using testing::TableInstance;
using testing::TwoAgents;

// Receiver 0 and donor 1 observe one edge each, optionally in one class.
Instance PathPair(double sigma2, int own, int donated, bool same_class) {
  InstanceData d;
  d.n = 2;
  d.allowed = {{0, 1}};
  PathVarianceModel m;
  m.edge_variance = {sigma2, sigma2};
  m.edge_class = {0, same_class ? 0 : 1};
  m.paths = {{0}, {1}};
  m.samples = {own, donated};
  d.utility.payload = m;
  return Instance(std::move(d));
}

// Empirical variance of the mean of z draws with variance sigma2.
double SimulatedMeanVariance(double sigma2, int z, int trials, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(sigma2));
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    double mean = 0.0;
    for (int k = 0; k < z; ++k) mean += g(rng);
    mean /= z;
    sum += mean;
    sum2 += mean * mean;
  }
  const double mu = sum / trials;
  return sum2 / trials - mu * mu;
}

TEST(Utility, EmptySetIsZero) {
  const Instance inst = TwoAgents(0.7, 0.4);
  EXPECT_EQ(Utility(inst, 0, Subset{}), 0.0);
  EXPECT_DOUBLE_EQ(Utility(inst, 0, Subset{1}), 0.7);
  EXPECT_DOUBLE_EQ(SingletonUtility(inst, 1, 0), 0.4);
}

TEST(Utility, RejectsNonPermittedSender) {
  const Instance inst = TableInstance(3, {{1}, {}, {}}, {{0.0, 1.0}, {}, {}});
  EXPECT_THROW(Utility(inst, 0, Subset{2}), std::invalid_argument);
  EXPECT_THROW(Utility(inst, 0, Subset{1, 1}), std::invalid_argument);
}

TEST(Utility, MeanEstimationInSymmetricForm) {
  InstanceData d;
  d.n = 3;
  d.allowed = {{0, 1}, {0, 2}};
  SymmetricWeightedModel m;
  m.sizes = {{0, 1, 2}, {0, 0, 0}, {0, 0, 0}};
  m.concave.assign(3, ConcaveSpec::VarianceReduction(1.0));
  d.utility.payload = m;
  const Instance inst(std::move(d));
  EXPECT_DOUBLE_EQ(Utility(inst, 0, Subset{1, 2}), 0.75);
}

TEST(Utility, PathVarianceSingleEdge) {
  // Frozen: 0.5 / 2 - 0.5 / 4.
  const Instance inst = PathPair(0.5, 2, 2, true);
  EXPECT_NEAR(Utility(inst, 0, Subset{1}), 0.125, 1e-15);
  EXPECT_NEAR(inst.BaselineVariance(0), 0.25, 1e-15);
  std::mt19937_64 rng(5);
  const double mc = SimulatedMeanVariance(0.5, 2, 200000, rng) -
                    SimulatedMeanVariance(0.5, 4, 200000, rng);
  EXPECT_NEAR(mc, 0.125, 0.005);
}

TEST(Utility, PathVarianceDonatedThreeSamples) {
  // Frozen: 0.6 / 2 - 0.6 / 5.
  const Instance inst = PathPair(0.6, 2, 3, true);
  EXPECT_NEAR(Utility(inst, 0, Subset{1}), 0.18, 1e-15);
  std::mt19937_64 rng(6);
  const double mc = SimulatedMeanVariance(0.6, 2, 200000, rng) -
                    SimulatedMeanVariance(0.6, 5, 200000, rng);
  EXPECT_NEAR(mc, 0.18, 0.006);
}

TEST(Utility, PathVarianceNeedsSharedClass) {
  EXPECT_EQ(Utility(PathPair(0.5, 2, 2, false), 0, Subset{1}), 0.0);
}

TEST(Normalize, TableWithMaxFour) {
  const Instance raw = TableInstance(2, {{1}, {0}}, {{0.0, 4.0}, {0.0, 2.0}});
  const auto [norm, scale] = NormalizeInstance(raw);
  EXPECT_DOUBLE_EQ(scale, 4.0);
  EXPECT_DOUBLE_EQ(Utility(norm, 0, Subset{1}), 1.0);
  EXPECT_DOUBLE_EQ(Utility(norm, 1, Subset{0}), 0.5);
}

TEST(Normalize, AlreadyNormalizedIsIdentity) {
  const Instance inst = TwoAgents(1.0, 0.3);
  const auto [norm, scale] = NormalizeInstance(inst);
  EXPECT_DOUBLE_EQ(scale, 1.0);
  EXPECT_DOUBLE_EQ(Utility(norm, 1, Subset{0}), 0.3);
}

TEST(Normalize, DegenerateInstanceThrows) {
  EXPECT_THROW(NormalizeInstance(TwoAgents(0.0, 0.0)), std::invalid_argument);
}

TEST(Normalize, GadgetScalesDown) {
  X3CSpec spec{3, 1, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}}, std::nullopt};
  const X3CInstance g = GenX3C(spec);
  EXPECT_GT(g.scale, 1.0);
  const auto [norm, scale] = NormalizeInstance(g.instance);
  EXPECT_DOUBLE_EQ(scale, g.scale);
  EXPECT_NEAR(MaxFullUtility(norm), 1.0, 1e-12);
}

ExchangeSolution Swap(double x01, double x10) {
  ExchangeSolution s;
  s.n = 2;
  s.columns = {Column{0, {1}, x01, {}}, Column{1, {0}, x10, {}}};
  return s;
}

TEST(Evaluate, EmptySolution) {
  ExchangeSolution s;
  s.n = 2;
  const SolveReport r = Evaluate(TwoAgents(1.0, 1.0), s);
  EXPECT_EQ(r.welfare, 0.0);
  EXPECT_EQ(r.balance_residual, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(r.feasible);
}

TEST(Evaluate, SymmetricTwoAgents) {
  const SolveReport r = Evaluate(TwoAgents(1.0, 1.0), Swap(1.0, 1.0));
  EXPECT_DOUBLE_EQ(r.welfare, 2.0);
  EXPECT_EQ(r.balance_residual, (std::vector<double>{0.0, 0.0}));
  EXPECT_TRUE(r.feasible);
}

TEST(Evaluate, ResidualIsReceivedMinusContributed) {
  const SolveReport r = Evaluate(TwoAgents(1.0, 1.0), Swap(1.0, 0.0));
  EXPECT_DOUBLE_EQ(r.balance_residual[0], 1.0);
  EXPECT_DOUBLE_EQ(r.balance_residual[1], -1.0);
  EXPECT_FALSE(r.feasible);
}

TEST(Evaluate, SlacksWidenFeasibility) {
  ExchangeSolution s = Swap(1.0, 0.95);
  EXPECT_FALSE(Evaluate(TwoAgents(1.0, 1.0), s).feasible);
  s.deltas = {0.0, 0.05};
  s.gammas = {0.05, 0.0};
  EXPECT_TRUE(Evaluate(TwoAgents(1.0, 1.0), s).feasible);
}

TEST(ScaleSolution, Endpoints) {
  const Instance inst = TwoAgents(1.0, 1.0);
  EXPECT_EQ(Evaluate(inst, ScaleSolution(Swap(1, 1), 0.0)).welfare, 0.0);
  EXPECT_EQ(AgentMass(ScaleSolution(Swap(1, 1), 0.0)), (std::vector<double>{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(Evaluate(inst, ScaleSolution(Swap(1, 1), 1.0)).welfare, 2.0);
  const SolveReport half = Evaluate(inst, ScaleSolution(Swap(1, 1), 0.5));
  EXPECT_DOUBLE_EQ(half.welfare, 1.0);
  EXPECT_EQ(half.balance_residual, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(ScaleSolution(Swap(1, 1), 1.5), std::invalid_argument);
}

TEST(Validate, RejectsMalformedSolutions) {
  const Instance inst = TwoAgents(1.0, 1.0);
  ExchangeSolution s = Swap(1.0, 1.0);
  EXPECT_NO_THROW(ValidateSolution(inst, s));
  s.columns.push_back(Column{0, {1}, 0.1, {}});
  EXPECT_THROW(ValidateSolution(inst, s), std::invalid_argument);
  ExchangeSolution bad = Swap(1.2, 1.0);
  EXPECT_THROW(ValidateSolution(inst, bad), std::invalid_argument);
  ExchangeSolution self = Swap(1.0, 1.0);
  self.columns[0].senders = {0};
  EXPECT_THROW(ValidateSolution(inst, self), std::invalid_argument);
}

// Random distribution over at most three sender sets per agent.
ExchangeSolution RandomSolution(const Instance& inst, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExchangeSolution s;
  s.n = inst.n();
  for (int i = 0; i < inst.n(); ++i) {
    const auto senders = inst.senders(i);
    if (senders.empty()) continue;
    double left = 1.0;
    for (int c = 0; c < 3; ++c) {
      Subset set;
      for (AgentId j : senders) {
        if (u(rng) < 0.5) set.push_back(j);
      }
      if (set.empty()) continue;
      const double w = left * u(rng);
      left -= w;
      s.columns.push_back(Column{i, set, w, {}});
    }
  }
  return MergeColumns(s);
}

ExchangeSolution Combine(const ExchangeSolution& a, const ExchangeSolution& b, double t) {
  ExchangeSolution out = ScaleSolution(a, t);
  for (const Column& c : ScaleSolution(b, 1.0 - t).columns) out.columns.push_back(c);
  return MergeColumns(out);
}

TEST(Evaluate, LinearInTheSolution) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = RandomCoverageInstance(5, 3, rng);
    const ExchangeSolution x = RandomSolution(inst, rng);
    const ExchangeSolution y = RandomSolution(inst, rng);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const SolveReport rx = Evaluate(inst, x), ry = Evaluate(inst, y);
    const SolveReport rz = Evaluate(inst, Combine(x, y, t));
    EXPECT_NEAR(rz.welfare, t * rx.welfare + (1 - t) * ry.welfare, 1e-9);
    for (int i = 0; i < inst.n(); ++i) {
      EXPECT_NEAR(rz.balance_residual[i],
                  t * rx.balance_residual[i] + (1 - t) * ry.balance_residual[i], 1e-9);
    }
  }
}

TEST(Evaluate, ResidualsSumToZero) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = RandomCoverageInstance(6, 3, rng);
    const SolveReport r = Evaluate(inst, RandomSolution(inst, rng));
    double total = 0.0;
    for (double v : r.balance_residual) total += v;
    EXPECT_NEAR(total, 0.0, 1e-12);
    EXPECT_NEAR(r.welfare, [&] {
      double w = 0.0;
      for (double v : r.per_agent_utility) w += v;
      return w;
    }(), 1e-12);
  }
}

// Diminishing returns: u(T + q) - u(T) >= u(S + q) - u(S) for T in S, q not in S.
void ExpectSubmodular(const Instance& inst, std::mt19937_64& rng, int samples) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < samples; ++t) {
    const AgentId i = static_cast<AgentId>(rng() % inst.n());
    const auto senders = inst.senders(i);
    if (senders.size() < 2) continue;
    const AgentId q = senders[rng() % senders.size()];
    Subset small, big;
    for (AgentId j : senders) {
      if (j == q) continue;
      const double r = u(rng);
      if (r < 0.3) small.push_back(j);
      if (r < 0.7) big.push_back(j);
    }
    auto with = [&](Subset s) {
      s.push_back(q);
      return Canonicalize(std::move(s));
    };
    const double gain_small = Utility(inst, i, with(small)) - Utility(inst, i, small);
    const double gain_big = Utility(inst, i, with(big)) - Utility(inst, i, big);
    EXPECT_GE(gain_small, gain_big - 1e-9);
    EXPECT_LE(Utility(inst, i, small), Utility(inst, i, big) + 1e-12);
  }
}

TEST(Utility, GeneratedModelsAreMonotoneSubmodular) {
  std::mt19937_64 rng(23);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ExpectSubmodular(GenRandom({6, 4, RandomModel::kSymmetric, seed}), rng, 200);
    ExpectSubmodular(GenRandom({6, 4, RandomModel::kCoverageTable, seed}), rng, 200);
  }
  const Graph grid = GridGraph(12, 12, 3);
  for (CorrelationMode mode : {CorrelationMode::kNone, CorrelationMode::kLocal}) {
    RoadSpec spec;
    spec.correlation = mode;
    spec.rho = mode == CorrelationMode::kNone ? 0.0 : 0.5;
    spec.seed = 9;
    ExpectSubmodular(GenRoad(grid, spec).instance, rng, 400);
  }
}

TEST(Utility, AccumulatorMatchesDirectEvaluation) {
  const Instance inst = GenRandom({5, 4, RandomModel::kSymmetric, 3});
  UtilityAccumulator acc(inst, 2);
  Subset so_far;
  for (int local = 0; local < static_cast<int>(inst.senders(2).size()); ++local) {
    acc.Add(local);
    so_far.push_back(inst.senders(2)[local]);
    EXPECT_NEAR(acc.Value(), Utility(inst, 2, so_far), 1e-12);
  }
  acc.Reset();
  EXPECT_EQ(acc.Value(), 0.0);
}

}  // namespace
}  // namespace dexchange
