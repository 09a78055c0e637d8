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

#include "dexchange/lp.h"

#include <random>

#include <gtest/gtest.h>

namespace dexchange {
namespace {

using Sense = LinearProgram::Sense;

TEST(Lp, TextbookOptimum) {
  // max 3x + 5y: x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
  LinearProgram lp;
  const int x = lp.AddVariable(3), y = lp.AddVariable(5);
  lp.AddRow({{x, 1}}, Sense::kLessEqual, 4);
  lp.AddRow({{y, 2}}, Sense::kLessEqual, 12);
  lp.AddRow({{x, 3}, {y, 2}}, Sense::kLessEqual, 18);
  const LpResult r = SolveLp(lp);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.objective, 36.0, 1e-12);
  EXPECT_NEAR(r.x[x], 2.0, 1e-12);
  EXPECT_NEAR(r.x[y], 6.0, 1e-12);
  EXPECT_LE(MaxViolation(lp, r.x), 1e-12);
}

TEST(Lp, EqualityAndGreaterRows) {
  // max -x - y: x + y >= 2, x - y = 1 -> (1.5, 0.5), -2.
  LinearProgram lp;
  const int x = lp.AddVariable(-1), y = lp.AddVariable(-1);
  lp.AddRow({{x, 1}, {y, 1}}, Sense::kGreaterEqual, 2);
  lp.AddRow({{x, 1}, {y, -1}}, Sense::kEqual, 1);
  const LpResult r = SolveLp(lp);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.objective, -2.0, 1e-12);
  EXPECT_NEAR(r.x[x], 1.5, 1e-12);
}

TEST(Lp, NegativeRightHandSide) {
  // max x: -x >= -3 -> 3.
  LinearProgram lp;
  const int x = lp.AddVariable(1);
  lp.AddRow({{x, -1}}, Sense::kGreaterEqual, -3);
  const LpResult r = SolveLp(lp);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(Lp, Infeasible) {
  LinearProgram lp;
  const int x = lp.AddVariable(1);
  lp.AddRow({{x, 1}}, Sense::kLessEqual, 1);
  lp.AddRow({{x, 1}}, Sense::kGreaterEqual, 2);
  EXPECT_EQ(SolveLp(lp).status, LpResult::Status::kInfeasible);
}

TEST(Lp, Unbounded) {
  LinearProgram lp;
  const int x = lp.AddVariable(1), y = lp.AddVariable(0);
  lp.AddRow({{x, 1}, {y, -1}}, Sense::kLessEqual, 1);
  EXPECT_EQ(SolveLp(lp).status, LpResult::Status::kUnbounded);
}

TEST(Lp, DegenerateRowsDoNotCycle) {
  // Many redundant constraints through the optimum.
  LinearProgram lp;
  const int x = lp.AddVariable(1), y = lp.AddVariable(1);
  for (int k = 1; k <= 20; ++k) lp.AddRow({{x, k}, {y, 1}}, Sense::kLessEqual, k + 1);
  lp.AddRow({{x, 1}, {y, 1}}, Sense::kLessEqual, 2);
  const LpResult r = SolveLp(lp);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
}

// Random bounded packing LPs: weak duality against a feasible dual built
// from the box rows, plus feasibility of the returned point.
TEST(Lp, RandomPackingLpsAreFeasibleAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int vars = 2 + static_cast<int>(rng() % 8), rows = 1 + static_cast<int>(rng() % 8);
    LinearProgram lp;
    double box_bound = 0.0;
    for (int v = 0; v < vars; ++v) {
      const double c = u(rng);
      lp.AddVariable(c);
      lp.AddRow({{v, 1}}, Sense::kLessEqual, 1);
      box_bound += c;
    }
    for (int r = 0; r < rows; ++r) {
      std::vector<std::pair<int, double>> coef;
      for (int v = 0; v < vars; ++v) coef.emplace_back(v, u(rng));
      lp.AddRow(coef, Sense::kLessEqual, u(rng) * vars);
    }
    const LpResult r = SolveLp(lp);
    ASSERT_TRUE(r.ok());
    EXPECT_LE(MaxViolation(lp, r.x), 1e-9);
    EXPECT_LE(r.objective, box_bound + 1e-12);
    double obj = 0.0;
    for (int v = 0; v < vars; ++v) obj += lp.objective[v] * r.x[v];
    EXPECT_NEAR(obj, r.objective, 1e-9);
  }
}

}  // namespace
}  // namespace dexchange
