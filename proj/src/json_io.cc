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

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace dexchange {
namespace {

[[noreturn]] void Bad(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

void Keys(const Json& j, const std::string& path, std::initializer_list<const char*> required,
          std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) Bad(path, "expected an object");
  for (const char* k : required) {
    if (!j.contains(k)) Bad(path, std::string("missing field '") + k + "'");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) Bad(path, "unknown field '" + key + "'");
  }
}

double Number(const Json& j, const std::string& path) {
  if (!j.is_number()) Bad(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Bad(path, "expected a finite number");
  return v;
}

long long Integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) Bad(path, "expected an integer");
  return j.get<long long>();
}

std::uint64_t Unsigned(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) Bad(path, "expected an integer");
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const long long v = j.get<long long>();
  if (v < 0) Bad(path, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

const Json& Array(const Json& j, const std::string& path) {
  if (!j.is_array()) Bad(path, "expected an array");
  return j;
}

std::string Str(const Json& j, const std::string& path) {
  if (!j.is_string()) Bad(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> Numbers(const Json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t k = 0; k < Array(j, path).size(); ++k) {
    out.push_back(Number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

std::vector<int> Ints(const Json& j, const std::string& path) {
  std::vector<int> out;
  for (std::size_t k = 0; k < Array(j, path).size(); ++k) {
    out.push_back(static_cast<int>(Integer(j[k], path + "[" + std::to_string(k) + "]")));
  }
  return out;
}

std::vector<std::vector<double>> Matrix(const Json& j, const std::string& path) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < Array(j, path).size(); ++k) {
    out.push_back(Numbers(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

UtilityModel UtilityFromJson(const Json& j) {
  const std::string path = "utility";
  if (!j.is_object() || !j.contains("kind")) Bad(path, "missing field 'kind'");
  const std::string kind = Str(j["kind"], path + ".kind");
  UtilityModel um;
  auto scales = [&]() {
    if (j.contains("scale")) um.scale = Number(j["scale"], path + ".scale");
    if (j.contains("agent_scale")) um.agent_scale = Numbers(j["agent_scale"], path + ".agent_scale");
  };
  if (kind == "explicit_table") {
    Keys(j, path, {"kind", "tables"}, {"scale", "agent_scale"});
    ExplicitTableModel m;
    const Json& tables = Array(j["tables"], path + ".tables");
    for (std::size_t k = 0; k < tables.size(); ++k) {
      const std::string p = path + ".tables[" + std::to_string(k) + "]";
      Keys(tables[k], p, {"agent", "senders", "values"});
      m.tables.push_back({static_cast<AgentId>(Integer(tables[k]["agent"], p + ".agent")),
                          Ints(tables[k]["senders"], p + ".senders"),
                          Numbers(tables[k]["values"], p + ".values")});
    }
    um.payload = std::move(m);
  } else if (kind == "symmetric_weighted" || kind == "continuous_concave") {
    const bool continuous = kind == "continuous_concave";
    if (continuous) {
      Keys(j, path, {"kind", "sizes", "concave", "floor"}, {"scale", "agent_scale"});
    } else {
      Keys(j, path, {"kind", "sizes", "concave"}, {"scale", "agent_scale"});
    }
    std::vector<ConcaveSpec> concave;
    const Json& fs = Array(j["concave"], path + ".concave");
    for (std::size_t k = 0; k < fs.size(); ++k) {
      concave.push_back(ConcaveFromJson(fs[k], path + ".concave[" + std::to_string(k) + "]"));
    }
    if (continuous) {
      um.payload = ContinuousConcaveModel{Matrix(j["sizes"], path + ".sizes"), std::move(concave),
                                          Number(j["floor"], path + ".floor")};
    } else {
      um.payload = SymmetricWeightedModel{Matrix(j["sizes"], path + ".sizes"), std::move(concave)};
    }
  } else if (kind == "path_variance") {
    Keys(j, path, {"kind", "edge_variance", "edge_class", "paths", "samples"},
         {"scale", "agent_scale"});
    PathVarianceModel m;
    m.edge_variance = Numbers(j["edge_variance"], path + ".edge_variance");
    m.edge_class = Ints(j["edge_class"], path + ".edge_class");
    const Json& paths = Array(j["paths"], path + ".paths");
    for (std::size_t k = 0; k < paths.size(); ++k) {
      m.paths.push_back(Ints(paths[k], path + ".paths[" + std::to_string(k) + "]"));
    }
    m.samples = Ints(j["samples"], path + ".samples");
    um.payload = std::move(m);
  } else if (kind == "x3c_coverage") {
    Keys(j, path, {"kind", "agents"}, {"scale", "agent_scale"});
    CoverageModel m;
    const Json& agents = Array(j["agents"], path + ".agents");
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const std::string p = path + ".agents[" + std::to_string(k) + "]";
      Keys(agents[k], p, {"agent", "element_weights", "covers"});
      CoverageModel::AgentCoverage a;
      a.agent = static_cast<AgentId>(Integer(agents[k]["agent"], p + ".agent"));
      a.element_weights = Numbers(agents[k]["element_weights"], p + ".element_weights");
      const Json& covers = Array(agents[k]["covers"], p + ".covers");
      for (std::size_t c = 0; c < covers.size(); ++c) {
        const std::string pc = p + ".covers[" + std::to_string(c) + "]";
        Keys(covers[c], pc, {"sender", "elements"});
        a.covers.push_back({static_cast<AgentId>(Integer(covers[c]["sender"], pc + ".sender")),
                            Ints(covers[c]["elements"], pc + ".elements")});
      }
      m.agents.push_back(std::move(a));
    }
    um.payload = std::move(m);
  } else {
    Bad(path + ".kind", "unknown utility kind '" + kind + "'");
  }
  scales();
  return um;
}

Json UtilityToJson(const UtilityModel& um) {
  Json j = std::visit(
      [](const auto& m) -> Json {
        using M = std::decay_t<decltype(m)>;
        Json out;
        if constexpr (std::is_same_v<M, ExplicitTableModel>) {
          out["kind"] = "explicit_table";
          out["tables"] = Json::array();
          for (const auto& t : m.tables) {
            out["tables"].push_back({{"agent", t.agent}, {"senders", t.senders}, {"values", t.values}});
          }
        } else if constexpr (std::is_same_v<M, SymmetricWeightedModel> ||
                             std::is_same_v<M, ContinuousConcaveModel>) {
          out["kind"] = std::is_same_v<M, SymmetricWeightedModel> ? "symmetric_weighted"
                                                                   : "continuous_concave";
          out["sizes"] = m.sizes;
          out["concave"] = Json::array();
          for (const auto& f : m.concave) out["concave"].push_back(ConcaveToJson(f));
          if constexpr (std::is_same_v<M, ContinuousConcaveModel>) out["floor"] = m.floor;
        } else if constexpr (std::is_same_v<M, PathVarianceModel>) {
          out["kind"] = "path_variance";
          out["edge_variance"] = m.edge_variance;
          out["edge_class"] = m.edge_class;
          out["paths"] = m.paths;
          out["samples"] = m.samples;
        } else {
          out["kind"] = "x3c_coverage";
          out["agents"] = Json::array();
          for (const auto& a : m.agents) {
            Json covers = Json::array();
            for (const auto& c : a.covers) {
              covers.push_back({{"sender", c.sender}, {"elements", c.elements}});
            }
            out["agents"].push_back({{"agent", a.agent},
                                     {"element_weights", a.element_weights},
                                     {"covers", covers}});
          }
        }
        return out;
      },
      um.payload);
  if (um.scale != 1.0) j["scale"] = um.scale;
  if (!um.agent_scale.empty()) j["agent_scale"] = um.agent_scale;
  return j;
}

}  // namespace

Json ConcaveToJson(const ConcaveSpec& f) {
  Json j{{"kind", f.KindName()}};
  switch (f.kind()) {
    case ConcaveSpec::Kind::kSqrt: break;
    case ConcaveSpec::Kind::kPower: j["c"] = f.param(); break;
    case ConcaveSpec::Kind::kCappedLinear: j["cap"] = f.param(); break;
    case ConcaveSpec::Kind::kVarianceReduction: j["sigma2"] = f.param(); break;
    case ConcaveSpec::Kind::kPiecewiseLinear: {
      j["breakpoints"] = Json::array();
      for (const auto& [x, y] : f.breakpoints()) j["breakpoints"].push_back({x, y});
      break;
    }
  }
  return j;
}

ConcaveSpec ConcaveFromJson(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) Bad(path, "missing field 'kind'");
  const std::string kind = Str(j["kind"], path + ".kind");
  if (kind == "sqrt") {
    Keys(j, path, {"kind"});
    return ConcaveSpec::Sqrt();
  }
  if (kind == "power") {
    Keys(j, path, {"kind", "c"});
    return ConcaveSpec::Power(Number(j["c"], path + ".c"));
  }
  if (kind == "capped_linear") {
    Keys(j, path, {"kind", "cap"});
    return ConcaveSpec::CappedLinear(Number(j["cap"], path + ".cap"));
  }
  if (kind == "variance_reduction") {
    Keys(j, path, {"kind", "sigma2"});
    return ConcaveSpec::VarianceReduction(Number(j["sigma2"], path + ".sigma2"));
  }
  if (kind == "piecewise_linear") {
    Keys(j, path, {"kind", "breakpoints"});
    std::vector<std::pair<double, double>> bp;
    const Json& arr = Array(j["breakpoints"], path + ".breakpoints");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::vector<double> xy =
          Numbers(arr[k], path + ".breakpoints[" + std::to_string(k) + "]");
      if (xy.size() != 2) Bad(path + ".breakpoints", "each breakpoint is [x, y]");
      bp.emplace_back(xy[0], xy[1]);
    }
    return ConcaveSpec::PiecewiseLinear(std::move(bp));
  }
  Bad(path + ".kind", "unknown concave kind '" + kind + "'");
}

SharingRuleSpec SharingFromJson(const Json& j, int n) {
  const std::string path = "sharing";
  Keys(j, path, {"kind"}, {"m", "seed", "weights"});
  SharingRuleSpec s;
  const std::string kind = Str(j["kind"], path + ".kind");
  if (kind == "shapley_exact") {
    s.kind = SharingRuleSpec::Kind::kShapleyExact;
  } else if (kind == "shapley_sampled") {
    s.kind = SharingRuleSpec::Kind::kShapleySampled;
  } else if (kind == "proportional") {
    s.kind = SharingRuleSpec::Kind::kProportional;
  } else {
    Bad(path + ".kind", "unknown sharing rule '" + kind + "'");
  }
  if (j.contains("m")) s.permutations = static_cast<int>(Integer(j["m"], path + ".m"));
  if (j.contains("seed")) s.seed = Unsigned(j["seed"], path + ".seed");
  if (j.contains("weights")) {
    if (s.kind != SharingRuleSpec::Kind::kProportional) {
      Bad(path + ".weights", "weights apply to proportional sharing only");
    }
    const Json& w = j["weights"];
    if (w.is_string()) {
      const std::string rule = w.get<std::string>();
      if (rule == "singleton") {
        s.weight_rule = SharingRuleSpec::WeightRule::kSingleton;
      } else if (rule == "size") {
        s.weight_rule = SharingRuleSpec::WeightRule::kSize;
      } else {
        Bad(path + ".weights", "unknown weight rule '" + rule + "'");
      }
    } else {
      s.weight_rule = SharingRuleSpec::WeightRule::kExplicit;
      s.weights = Matrix(w, path + ".weights");
      if (static_cast<int>(s.weights.size()) != n) Bad(path + ".weights", "expected n rows");
    }
  }
  return s;
}

Json SharingToJson(const SharingRuleSpec& s) {
  Json j;
  switch (s.kind) {
    case SharingRuleSpec::Kind::kShapleyExact: j["kind"] = "shapley_exact"; break;
    case SharingRuleSpec::Kind::kShapleySampled:
      j["kind"] = "shapley_sampled";
      j["m"] = s.permutations;
      j["seed"] = s.seed;
      break;
    case SharingRuleSpec::Kind::kProportional:
      j["kind"] = "proportional";
      if (s.weight_rule == SharingRuleSpec::WeightRule::kSingleton) j["weights"] = "singleton";
      if (s.weight_rule == SharingRuleSpec::WeightRule::kSize) j["weights"] = "size";
      if (s.weight_rule == SharingRuleSpec::WeightRule::kExplicit) j["weights"] = s.weights;
      break;
  }
  return j;
}

Instance InstanceFromJson(const Json& j) {
  Keys(j, "instance", {"n", "allowed", "utility", "sharing"}, {"epsilon", "seed"});
  InstanceData d;
  const long long n = Integer(j["n"], "n");
  if (n < 1) Bad("n", "need at least one agent");
  d.n = static_cast<int>(n);
  const Json& allowed = Array(j["allowed"], "allowed");
  for (std::size_t k = 0; k < allowed.size(); ++k) {
    const std::vector<int> pair = Ints(allowed[k], "allowed[" + std::to_string(k) + "]");
    if (pair.size() != 2) Bad("allowed[" + std::to_string(k) + "]", "expected [receiver, sender]");
    d.allowed.emplace_back(pair[0], pair[1]);
  }
  if (j.contains("epsilon")) d.epsilon = Number(j["epsilon"], "epsilon");
  if (j.contains("seed")) d.seed = Unsigned(j["seed"], "seed");
  d.utility = UtilityFromJson(j["utility"]);
  d.sharing = SharingFromJson(j["sharing"], d.n);
  return Instance(std::move(d));
}

Json InstanceToJson(const Instance& instance) {
  const InstanceData& d = instance.data();
  Json allowed = Json::array();
  for (const auto& [i, s] : d.allowed) allowed.push_back({i, s});
  return Json{{"n", d.n},
              {"allowed", allowed},
              {"epsilon", d.epsilon},
              {"seed", d.seed},
              {"utility", UtilityToJson(d.utility)},
              {"sharing", SharingToJson(d.sharing)}};
}

ExchangeSolution SolutionFromJson(const Json& j, const Instance& instance) {
  Keys(j, "solution", {"n", "columns"}, {"deltas", "gammas"});
  ExchangeSolution s;
  s.n = static_cast<int>(Integer(j["n"], "solution.n"));
  const Json& cols = Array(j["columns"], "solution.columns");
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const std::string p = "solution.columns[" + std::to_string(k) + "]";
    Keys(cols[k], p, {"agent", "senders", "weight"}, {"fractions"});
    Column c;
    c.agent = static_cast<AgentId>(Integer(cols[k]["agent"], p + ".agent"));
    c.senders = Ints(cols[k]["senders"], p + ".senders");
    c.weight = Number(cols[k]["weight"], p + ".weight");
    if (cols[k].contains("fractions")) c.fractions = Numbers(cols[k]["fractions"], p + ".fractions");
    s.columns.push_back(std::move(c));
  }
  if (j.contains("deltas")) s.deltas = Numbers(j["deltas"], "solution.deltas");
  if (j.contains("gammas")) s.gammas = Numbers(j["gammas"], "solution.gammas");
  ValidateSolution(instance, s);
  return s;
}

Json SolutionToJson(const ExchangeSolution& s) {
  Json cols = Json::array();
  for (const Column& c : s.columns) {
    Json col{{"agent", c.agent}, {"senders", c.senders}, {"weight", c.weight}};
    if (!c.fractions.empty()) col["fractions"] = c.fractions;
    cols.push_back(std::move(col));
  }
  Json j{{"n", s.n}, {"columns", cols}};
  if (!s.deltas.empty()) j["deltas"] = s.deltas;
  if (!s.gammas.empty()) j["gammas"] = s.gammas;
  return j;
}

Json ReportToJson(const SolveReport& r) {
  const MwuTelemetry& t = r.telemetry;
  return Json{{"welfare", r.welfare},
              {"per_agent_utility", r.per_agent_utility},
              {"balance_residual", r.balance_residual},
              {"received", r.received},
              {"contributed", r.contributed},
              {"iterations", r.iterations},
              {"feasible", r.feasible},
              {"best_B", r.best_B},
              {"diagnostic", r.diagnostic},
              {"telemetry",
               {{"oracle_calls", t.oracle_calls},
                {"b_probes", t.b_probes},
                {"columns_generated", t.columns_generated},
                {"alpha", t.alpha},
                {"eta", t.eta},
                {"rho", t.rho},
                {"regret_lhs", t.regret_lhs},
                {"regret_rhs", t.regret_rhs},
                {"regret_ok", t.regret_ok},
                {"max_abs_loss", t.max_abs_loss},
                {"early_exit", t.early_exit},
                {"sparsified", t.sparsified},
                {"guarantee", t.guarantee}}}};
}

std::pair<AgentId, DualPrices> PricesFromJson(const Json& j, int n) {
  Keys(j, "prices", {"agent", "q"});
  const long long agent = Integer(j["agent"], "prices.agent");
  if (agent < 0 || agent >= n) Bad("prices.agent", "agent out of range");
  const std::vector<std::vector<double>> q = Matrix(j["q"], "prices.q");
  if (static_cast<int>(q.size()) != n) Bad("prices.q", "expected n rows");
  DualPrices prices(n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(q[r].size()) != n) Bad("prices.q", "expected n columns");
    for (int c = 0; c < n; ++c) prices(r, c) = q[r][c];
  }
  return {static_cast<AgentId>(agent), prices};
}

Json MisreportToJson(const Misreport& m) {
  return Json{{"agent", m.agent}, {"utility_factor", m.utility_factor}, {"hide_from", m.hide_from}};
}

Json ViolationToJson(const MisreportViolation& v) {
  return Json{{"agent", v.agent},
              {"misreport", MisreportToJson(v.misreport)},
              {"U_before", v.utility_truthful},
              {"U_after", v.utility_misreport}};
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace dexchange
