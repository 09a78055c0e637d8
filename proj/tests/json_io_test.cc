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

#include "dexchange/json_io.h"

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dexchange/instances.h"
#include "dexchange/utility.h"

namespace dexchange {
namespace {

void ExpectSameUtilities(const Instance& a, const Instance& b) {
  ASSERT_EQ(a.n(), b.n());
  ASSERT_EQ(a.data().allowed, b.data().allowed);
  for (int i = 0; i < a.n(); ++i) {
    const auto senders = a.senders(i);
    const int k = std::min<int>(static_cast<int>(senders.size()), 10);
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      Subset s;
      for (int t = 0; t < k; ++t) {
        if (mask >> t & 1) s.push_back(senders[t]);
      }
      ASSERT_EQ(Utility(a, i, s), Utility(b, i, s));
      ASSERT_EQ(Shares(a, i, s), Shares(b, i, s));
    }
  }
}

Instance Continuous() {
  InstanceData d;
  d.n = 2;
  d.allowed = {{0, 1}, {1, 0}};
  d.utility.payload = ContinuousConcaveModel{
      {{0, 1.5}, {0.5, 0}},
      {ConcaveSpec::PiecewiseLinear({{1.0, 1.0}, {2.0, 1.5}}), ConcaveSpec::CappedLinear(0.4)},
      0.05};
  d.sharing.kind = SharingRuleSpec::Kind::kProportional;
  d.sharing.weight_rule = SharingRuleSpec::WeightRule::kSize;
  return Instance(std::move(d));
}

TEST(JsonIo, InstancesRoundTrip) {
  std::vector<Instance> cases{
      GenRandom({5, 3, RandomModel::kSymmetric, 1}),
      GenRandom({5, 3, RandomModel::kCoverageTable, 2}),
      GenX3C({3, 1, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}}, std::nullopt}).instance,
      GenRoad(GridGraph(12, 12, 1), RoadSpec{}).instance,
      GenCoreGap(7),
      Continuous(),
      ApplyMisreport(GenRandom({5, 3, RandomModel::kSymmetric, 3}), Misreport{1, 0.5, {}}),
  };
  SharingRuleSpec explicit_rule;
  explicit_rule.kind = SharingRuleSpec::Kind::kProportional;
  explicit_rule.weight_rule = SharingRuleSpec::WeightRule::kExplicit;
  explicit_rule.weights.assign(5, std::vector<double>(5, 1.0));
  cases.push_back(WithSharing(GenRandom({5, 3, RandomModel::kCoverageTable, 4}), explicit_rule));
  for (const Instance& inst : cases) {
    const Json j = InstanceToJson(inst);
    const Instance back = InstanceFromJson(Json::parse(j.dump()));
    EXPECT_EQ(InstanceToJson(back), j);
    ExpectSameUtilities(inst, back);
  }
}

TEST(JsonIo, RejectsUnknownAndMissingFields) {
  Json j = InstanceToJson(GenCoreGap(6));
  Json extra = j;
  extra["colour"] = "blue";
  EXPECT_THROW(InstanceFromJson(extra), std::invalid_argument);
  Json nested = j;
  nested["utility"]["mystery"] = 1;
  EXPECT_THROW(InstanceFromJson(nested), std::invalid_argument);
  Json missing = j;
  missing.erase("allowed");
  EXPECT_THROW(InstanceFromJson(missing), std::invalid_argument);
  Json wrong_type = j;
  wrong_type["n"] = "six";
  EXPECT_THROW(InstanceFromJson(wrong_type), std::invalid_argument);
  Json bad_kind = j;
  bad_kind["utility"]["kind"] = "cobb_douglas";
  EXPECT_THROW(InstanceFromJson(bad_kind), std::invalid_argument);
}

TEST(JsonIo, ErrorNamesThePath) {
  Json j = InstanceToJson(GenCoreGap(6));
  j["utility"]["concave"][2]["kind"] = "exp";
  try {
    InstanceFromJson(j);
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("concave"), std::string::npos) << e.what();
  }
}

TEST(JsonIo, SolutionsRoundTripAndValidate) {
  const Instance inst = GenCoreGap(6);
  const ExchangeSolution s = CoreGapLongCycle(6);
  const Json j = SolutionToJson(s);
  const ExchangeSolution back = SolutionFromJson(j, inst);
  EXPECT_EQ(SolutionToJson(back), j);
  EXPECT_EQ(Evaluate(inst, back).welfare, Evaluate(inst, s).welfare);
  Json over = j;
  over["columns"][0]["weight"] = 1.5;
  EXPECT_THROW(SolutionFromJson(over, inst), std::invalid_argument);
  Json stranger = j;
  stranger["columns"][0]["senders"] = Json::array({3});
  EXPECT_THROW(SolutionFromJson(stranger, inst), std::invalid_argument);
  Json extra = j;
  extra["columns"][0]["note"] = "x";
  EXPECT_THROW(SolutionFromJson(extra, inst), std::invalid_argument);
}

TEST(JsonIo, PricesAndReports) {
  Json j{{"agent", 1}, {"q", {{0, 0.5}, {0.25, 0}}}};
  const auto [agent, q] = PricesFromJson(j, 2);
  EXPECT_EQ(agent, 1);
  EXPECT_EQ(q(1, 0), 0.25);
  j["q"] = {{0, 1}};
  EXPECT_THROW(PricesFromJson(j, 2), std::invalid_argument);
  const SolveReport r = Evaluate(GenCoreGap(6), CoreGapLongCycle(6));
  const Json rep = ReportToJson(r);
  EXPECT_DOUBLE_EQ(rep.at("welfare").get<double>(), r.welfare);
  EXPECT_EQ(rep.at("balance_residual").size(), 6u);
  const Json v = ViolationToJson({2, Misreport{2, 0.5, {1}}, 0.1, 0.2});
  EXPECT_EQ(v.at("misreport").at("hide_from"), Json::array({1}));
}

TEST(JsonIo, FileHelpers) {
  const std::string path = ::testing::TempDir() + "json_io_case.json";
  WriteJsonFile(path, Json{{"a", 1}});
  EXPECT_EQ(ReadJsonFile(path), (Json{{"a", 1}}));
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("{not json", f);
  std::fclose(f);
  EXPECT_THROW(ReadJsonFile(path), std::invalid_argument);
  std::remove(path.c_str());
  EXPECT_THROW(ReadJsonFile(path), std::invalid_argument);
}

}  // namespace
}  // namespace dexchange
