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

// Strict JSON encodings of instances, solutions and reports. Decoders reject
// unknown fields, missing required fields and wrong types with
// std::invalid_argument naming the offending path.

#ifndef DEXCHANGE_JSON_IO_H_
#define DEXCHANGE_JSON_IO_H_

#include <string>

#include "json.hpp"

#include "dexchange/instance.h"
#include "dexchange/oracles.h"
#include "dexchange/solution.h"
#include "dexchange/stability.h"

namespace dexchange {

using Json = nlohmann::json;

// {"n", "allowed": [[receiver, sender], ...], "epsilon", "seed",
//  "utility": {"kind", ...payload, "scale"?, "agent_scale"?},
//  "sharing": {"kind", "m"?, "seed"?, "weights"?}}
Instance InstanceFromJson(const Json& j);
Json InstanceToJson(const Instance& instance);

Json ConcaveToJson(const ConcaveSpec& f);
ConcaveSpec ConcaveFromJson(const Json& j, const std::string& path);

SharingRuleSpec SharingFromJson(const Json& j, int n);
Json SharingToJson(const SharingRuleSpec& s);

// {"n", "columns": [{"agent", "senders", "weight", "fractions"?}],
//  "deltas"?, "gammas"?}. Validated against `instance`.
ExchangeSolution SolutionFromJson(const Json& j, const Instance& instance);
Json SolutionToJson(const ExchangeSolution& solution);

Json ReportToJson(const SolveReport& report);

// {"agent", "q": n x n}.
std::pair<AgentId, DualPrices> PricesFromJson(const Json& j, int n);

Json MisreportToJson(const Misreport& m);
Json ViolationToJson(const MisreportViolation& v);

// File helpers; parse failures and unreadable files raise
// std::invalid_argument.
Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);

}  // namespace dexchange

#endif  // DEXCHANGE_JSON_IO_H_
