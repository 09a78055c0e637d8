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

// Command-line driver. Exit codes: 0 success, 1 audit invariant failure,
// 2 invalid input, 3 solver failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dexchange/exact.h"
#include "dexchange/experiment.h"
#include "dexchange/instances.h"
#include "dexchange/json_io.h"
#include "dexchange/logging.h"
#include "dexchange/mwu.h"
#include "dexchange/oracles.h"
#include "dexchange/stability.h"

namespace dexchange {
namespace {

constexpr int kExitAudit = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

// Solver-side failure that is not the caller's fault.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Emit(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    WriteJsonFile(path, j);
  }
}

Instance LoadInstance(const std::string& path) { return InstanceFromJson(ReadJsonFile(path)); }

ExchangeSolution LoadSolution(const std::string& path, const Instance& instance) {
  return SolutionFromJson(ReadJsonFile(path), instance);
}

std::pair<int, int> ParseGrid(const std::string& spec) {
  const std::size_t x = spec.find('x');
  if (x == std::string::npos) throw std::invalid_argument("grid must look like WxH");
  try {
    return {std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1))};
  } catch (const std::exception&) {
    throw std::invalid_argument("grid must look like WxH");
  }
}

Graph LoadGraph(const std::string& csv, const std::string& grid, std::uint64_t seed) {
  if (!csv.empty() && !grid.empty()) throw std::invalid_argument("pass --graph or --grid, not both");
  if (!csv.empty()) return LoadEdgeListCsv(csv);
  const auto [w, h] = ParseGrid(grid.empty() ? "12x12" : grid);
  return GridGraph(w, h, seed);
}

SharingRuleSpec ParseSharing(const std::string& name, const SharingRuleSpec& current,
                             int permutations) {
  SharingRuleSpec s = current;
  s.weights.clear();
  if (name == "shapley_exact") {
    s.kind = SharingRuleSpec::Kind::kShapleyExact;
  } else if (name == "shapley_sampled") {
    s.kind = SharingRuleSpec::Kind::kShapleySampled;
  } else if (name == "proportional") {
    s.kind = SharingRuleSpec::Kind::kProportional;
    s.weight_rule = SharingRuleSpec::WeightRule::kSingleton;
  } else if (name == "proportional_size") {
    s.kind = SharingRuleSpec::Kind::kProportional;
    s.weight_rule = SharingRuleSpec::WeightRule::kSize;
  } else {
    throw std::invalid_argument("unknown sharing rule '" + name + "'");
  }
  if (permutations > 0) s.permutations = permutations;
  return s;
}

Json ResidualJson(const SolveReport& r) {
  return Json{{"welfare", r.welfare},
              {"per_agent_utility", r.per_agent_utility},
              {"balance_residual", r.balance_residual},
              {"feasible", r.feasible}};
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::uint64_t seed = 0;
  int m = 3, k = 1;
  bool no_cover = false;
  int n = 6;
  int senders = 2;
  std::string model = "symmetric";
  double epsilon = 0.01;
  std::string graph, grid;
  int radius = 8, agents = 20, permutations = 10;
  std::string correlation = "none";
  double rho = 0.0;
};

void AddGen(CLI::App& app, GenArgs& a, int& code) {
  CLI::App* gen = app.add_subcommand("gen", "Generate an instance JSON");
  gen->require_subcommand(1);
  gen->add_option("-o,--out", a.out, "Output path (default stdout)");
  gen->add_option("--seed", a.seed, "RNG seed");

  CLI::App* x3c = gen->add_subcommand("x3c", "Exact-cover hardness gadget (raw units)");
  x3c->add_option("--m", a.m, "Number of 3-sets")->check(CLI::PositiveNumber);
  x3c->add_option("--k", a.k, "Cover size")->check(CLI::PositiveNumber);
  x3c->add_flag("--no-cover", a.no_cover, "Draw sets without an exact cover");
  x3c->callback([&] {
    const X3CSpec spec = RandomX3C(a.m, a.k, !a.no_cover, a.seed);
    const X3CInstance g = GenX3C(spec);
    Emit(a.out, InstanceToJson(g.instance));
    std::cerr << "target " << g.target << " scale " << g.scale << "\n";
    code = 0;
  });

  CLI::App* core = gen->add_subcommand("core-gap", "Cycle instance with a heavy pair");
  core->add_option("--n", a.n, "Agents (>= 6)");
  core->callback([&] {
    Emit(a.out, InstanceToJson(GenCoreGap(a.n)));
    code = 0;
  });

  CLI::App* rnd = gen->add_subcommand("random", "Random synthetic instance (normalized)");
  rnd->add_option("--n", a.n, "Agents");
  rnd->add_option("--senders", a.senders, "Permitted senders per agent");
  rnd->add_option("--model", a.model, "symmetric | table");
  rnd->add_option("--epsilon", a.epsilon, "Balance slack");
  rnd->callback([&] {
    RandomSpec spec;
    spec.n = a.n;
    spec.senders_per_agent = a.senders;
    spec.model = ParseRandomModel(a.model);
    spec.seed = a.seed;
    spec.epsilon = a.epsilon;
    Emit(a.out, InstanceToJson(GenRandom(spec)));
    code = 0;
  });

  CLI::App* road = gen->add_subcommand("road", "Path-variance instance on a road graph");
  road->add_option("--graph", a.graph, "Edge-list CSV (node_a,node_b)");
  road->add_option("--grid", a.grid, "Synthetic WxH grid when no CSV is given");
  road->add_option("--radius", a.radius, "Neighborhood radius");
  road->add_option("--agents", a.agents, "Number of agents");
  road->add_option("--correlation", a.correlation, "none | random | local");
  road->add_option("--rho", a.rho, "Correlation level in [0, 1]");
  road->add_option("--permutations", a.permutations, "Sampled-Shapley permutations");
  road->add_option("--epsilon", a.epsilon, "Balance slack");
  road->callback([&] {
    RoadSpec spec;
    spec.radius = a.radius;
    spec.n_agents = a.agents;
    spec.correlation = ParseCorrelationMode(a.correlation);
    spec.rho = a.rho;
    spec.seed = a.seed;
    spec.permutations = a.permutations;
    spec.epsilon = a.epsilon;
    const RoadInstance r = GenRoad(LoadGraph(a.graph, a.grid, a.seed), spec);
    Emit(a.out, InstanceToJson(r.instance));
    std::cerr << "scale " << r.scale << " baseline_variance " << r.baseline_variance << "\n";
    code = 0;
  });
  // -o and --seed live on `gen` and may follow the generator name.
  for (CLI::App* sub : gen->get_subcommands({})) sub->fallthrough();
}

// ---- solve / exact / oracle -----------------------------------------------

struct SolveArgs {
  std::string instance, out, report;
  std::string oracle = "bucketing";
  std::string sharing;
  int permutations = 0;
  double epsilon = -1.0;
  double delta = 1.0 / 3.0;
  double oracle_eps = 0.1;
  int max_iters = 20000;
  std::uint64_t seed = 0;
  std::string trace;
  int threads = 1;
};

void AddSolve(CLI::App& app, SolveArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("solve", "Approximate welfare maximization (MWU)");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("-o,--out", a.out, "Solution JSON (default stdout)");
  cmd->add_option("--report", a.report, "Report JSON (default stderr summary only)");
  cmd->add_option("--oracle", a.oracle, "bucketing | knapsack | continuous | bruteforce");
  cmd->add_option("--sharing", a.sharing,
                  "Override: shapley_exact | shapley_sampled | proportional | proportional_size");
  cmd->add_option("--permutations", a.permutations, "Sampled-Shapley permutations");
  cmd->add_option("--epsilon", a.epsilon, "Balance slack (default: the instance's)");
  cmd->add_option("--delta", a.delta, "Welfare-grid ratio in (0, 1/3]");
  cmd->add_option("--oracle-eps", a.oracle_eps, "Oracle accuracy");
  cmd->add_option("--max-iters", a.max_iters, "Iteration cap per welfare target");
  cmd->add_option("--seed", a.seed, "Seed");
  cmd->add_option("--trace", a.trace, "JSON-lines telemetry path");
  cmd->add_option("--threads", a.threads, "Oracle threads");
  cmd->callback([&] {
    Instance instance = LoadInstance(a.instance);
    if (!a.sharing.empty()) {
      instance = WithSharing(instance, ParseSharing(a.sharing, instance.sharing(), a.permutations));
    }
    MwuConfig config;
    config.eps = a.epsilon;
    config.delta = a.delta;
    config.oracle_eps = a.oracle_eps;
    config.max_iters = a.max_iters;
    config.seed = a.seed;
    config.trace_path = a.trace;
    config.threads = a.threads;
    const OracleKind oracle = ParseOracleKind(a.oracle);
    CheckOracleSupport(instance, oracle);
    const auto [solution, report] = SolveWelfare(instance, config, oracle);
    Emit(a.out, SolutionToJson(solution));
    if (!a.report.empty()) WriteJsonFile(a.report, ReportToJson(report));
    std::cerr << "welfare " << report.welfare << " feasible " << report.feasible << " best_B "
              << report.best_B << "\n";
    if (!report.diagnostic.empty()) throw SolverFailure(report.diagnostic);
    code = 0;
  });
}

struct ExactArgs {
  std::string instance, out, report;
  double epsilon = -1.0;
};

void AddExact(CLI::App& app, ExactArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("exact", "Exact welfare LP over all columns (small n)");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("-o,--out", a.out, "Solution JSON (default stdout)");
  cmd->add_option("--report", a.report, "Report JSON");
  cmd->add_option("--epsilon", a.epsilon, "Balance slack (default: the instance's)");
  cmd->callback([&] {
    const Instance instance = LoadInstance(a.instance);
    const double eps = a.epsilon < 0.0 ? instance.epsilon() : a.epsilon;
    ExactWelfare exact;
    try {
      exact = ExactWelfareLp(instance, eps);
    } catch (const std::runtime_error& e) {
      throw SolverFailure(e.what());
    }
    Emit(a.out, SolutionToJson(exact.solution));
    const SolveReport report = Evaluate(WithEpsilon(instance, eps), exact.solution);
    if (!a.report.empty()) WriteJsonFile(a.report, ReportToJson(report));
    std::cerr << "welfare " << report.welfare << " columns " << exact.nonzero_columns << "\n";
    code = 0;
  });
}

struct OracleArgs {
  std::string instance, prices;
  std::string oracle = "bruteforce";
  double eps = 0.1;
};

void AddOracle(CLI::App& app, OracleArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("oracle", "Run one dual oracle on given pair prices");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("-q,--prices", a.prices, "Prices JSON {agent, q}")->required();
  cmd->add_option("--oracle", a.oracle, "bruteforce | bucketing | knapsack | continuous");
  cmd->add_option("--eps", a.eps, "Oracle accuracy");
  cmd->callback([&] {
    const Instance instance = LoadInstance(a.instance);
    const auto [agent, q] = PricesFromJson(ReadJsonFile(a.prices), instance.n());
    const OracleKind kind = ParseOracleKind(a.oracle);
    CheckOracleSupport(instance, kind);
    const OracleResult r = RunOracle(instance, kind, agent, q, a.eps);
    Json out{{"agent", agent}, {"chosen", r.chosen}, {"value", r.value},
             {"guesses", r.guesses}, {"alpha", OracleAlpha(instance, kind, a.eps)}};
    if (!r.fractions.empty()) out["fractions"] = r.fractions;
    std::cout << out.dump(2) << "\n";
    code = 0;
  });
}

// ---- stability / fuzz / audit ---------------------------------------------

Mechanism ParseMechanism(const std::string& name) {
  if (name == "matching") return GreedyMatchingMechanism();
  if (name == "cycles") return CycleCancelingMechanism();
  throw std::invalid_argument("unknown mechanism '" + name + "'");
}

struct StabilityArgs {
  std::string instance, out;
  std::string rule = "matching";
};

void AddStability(CLI::App& app, StabilityArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("stability", "Greedy matching or cycle canceling");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("-o,--out", a.out, "Solution JSON (default stdout)");
  cmd->add_option("--rule", a.rule, "matching | cycles");
  cmd->callback([&] {
    const Instance instance = LoadInstance(a.instance);
    ExchangeSolution solution;
    Json cycles = Json::array();
    if (a.rule == "matching") {
      solution = GreedyMatching(instance);
    } else if (a.rule == "cycles") {
      auto [s, found] = GreedyCycleCanceling(instance);
      solution = std::move(s);
      for (const TradeCycle& c : found) {
        cycles.push_back({{"agents", c.agents}, {"bottleneck", c.bottleneck}});
      }
    } else {
      throw std::invalid_argument("unknown rule '" + a.rule + "'");
    }
    Emit(a.out, SolutionToJson(solution));
    Json summary = ResidualJson(Evaluate(instance, solution));
    summary["blocking_pairs"] = CheckTwoStability(instance, solution).size();
    if (a.rule == "cycles") summary["cycles"] = cycles;
    std::cerr << summary.dump() << "\n";
    code = 0;
  });
}

struct FuzzArgs {
  std::string instance;
  std::string mechanism = "cycles";
  int trials = 100;
  std::uint64_t seed = 0;
};

void AddFuzz(CLI::App& app, FuzzArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("fuzz", "Random feasible misreports against a mechanism");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("--mechanism", a.mechanism, "matching | cycles");
  cmd->add_option("--trials", a.trials, "Misreports to try");
  cmd->add_option("--seed", a.seed, "Seed");
  cmd->callback([&] {
    const Instance instance = LoadInstance(a.instance);
    const auto violations =
        StrategyproofnessFuzz(instance, ParseMechanism(a.mechanism), a.trials, a.seed);
    for (const auto& v : violations) std::cout << ViolationToJson(v).dump() << "\n";
    std::cerr << violations.size() << " violations in " << a.trials << " trials\n";
    code = violations.empty() ? 0 : kExitAudit;
  });
}

struct AuditArgs {
  std::string instance, solution;
  int core_size = 0;
  int fuzz_trials = 0;
  std::string mechanism = "cycles";
  std::uint64_t seed = 0;
  bool require_stable = false;
};

void AddAudit(CLI::App& app, AuditArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("audit", "Residuals, blocking pairs/coalitions, fuzzing");
  cmd->add_option("-i,--instance", a.instance, "Instance JSON")->required();
  cmd->add_option("-s,--solution", a.solution, "Solution JSON")->required();
  cmd->add_option("--core-size", a.core_size, "Also audit coalitions up to this size (>= 2)");
  cmd->add_option("--fuzz-trials", a.fuzz_trials, "Also fuzz the chosen mechanism");
  cmd->add_option("--mechanism", a.mechanism, "matching | cycles (for --fuzz-trials)");
  cmd->add_option("--seed", a.seed, "Fuzz seed");
  cmd->add_flag("--require-stable", a.require_stable, "Fail on any blocking pair");
  cmd->callback([&] {
    const Instance instance = LoadInstance(a.instance);
    const ExchangeSolution solution = LoadSolution(a.solution, instance);
    const SolveReport report = Evaluate(instance, solution);
    Json out = ResidualJson(report);
    bool ok = report.feasible;
    Json pairs = Json::array();
    const auto blocking = CheckTwoStability(instance, solution);
    for (const BlockingPair& b : blocking) {
      pairs.push_back({{"agents", {b.first, b.second}}, {"mutual", b.mutual}});
    }
    out["blocking_pairs"] = pairs;
    if (a.require_stable && !blocking.empty()) ok = false;
    if (a.core_size >= 2) {
      CoreAuditOptions options;
      options.max_coalition = a.core_size;
      Json coalitions = Json::array();
      for (const BlockingCoalition& c : ExactCoreAudit(instance, solution, options)) {
        coalitions.push_back({{"members", c.members},
                              {"improvement", c.improvement},
                              {"deviation_utility", c.deviation_utility}});
      }
      out["blocking_coalitions"] = coalitions;
    }
    if (a.fuzz_trials > 0) {
      Json violations = Json::array();
      for (const auto& v : StrategyproofnessFuzz(instance, ParseMechanism(a.mechanism),
                                                 a.fuzz_trials, a.seed)) {
        violations.push_back(ViolationToJson(v));
      }
      if (!violations.empty()) ok = false;
      out["fuzz_violations"] = violations;
    }
    out["ok"] = ok;
    std::cout << out.dump(2) << "\n";
    code = ok ? 0 : kExitAudit;
  });
}

// ---- experiment -----------------------------------------------------------

struct ExperimentArgs {
  std::string graph, grid;
  std::uint64_t grid_seed = 1;
  int replicates = 5;
  std::vector<std::string> modes{"none"};
  std::vector<double> rhos{0.0};
  std::uint64_t seed = 0;
  int max_iters = 20000;
  int threads = 1;
  std::string csv, svg;
};

void AddExperiment(CLI::App& app, ExperimentArgs& a, int& code) {
  CLI::App* cmd = app.add_subcommand("experiment", "Road-network comparison vs. matching");
  cmd->add_option("--graph", a.graph, "Edge-list CSV");
  cmd->add_option("--grid", a.grid, "Synthetic WxH grid (default 12x12)");
  cmd->add_option("--grid-seed", a.grid_seed, "Diagonal placement seed for --grid");
  cmd->add_option("-r,--replicates", a.replicates, "Replicates per correlation level");
  cmd->add_option("--modes", a.modes, "Correlation modes: none random local")->delimiter(',');
  cmd->add_option("--rhos", a.rhos, "Correlation levels")->delimiter(',');
  cmd->add_option("--seed", a.seed, "Seed");
  cmd->add_option("--max-iters", a.max_iters, "MWU iteration cap per target");
  cmd->add_option("--threads", a.threads, "Replicates run in parallel");
  cmd->add_option("--csv", a.csv, "CSV output (default stdout)");
  cmd->add_option("--svg", a.svg, "Optional SVG box plot");
  cmd->callback([&] {
    ExperimentConfig config;
    config.graph = LoadGraph(a.graph, a.grid, a.grid_seed);
    config.replicates = a.replicates;
    config.modes.clear();
    for (const auto& m : a.modes) config.modes.push_back(ParseCorrelationMode(m));
    config.rhos = a.rhos;
    config.seed = a.seed;
    config.mwu.max_iters = a.max_iters;
    config.threads = a.threads;
    const auto rows = RunExperiment(config);
    if (a.csv.empty() || a.csv == "-") {
      WriteExperimentCsv(std::cout, rows);
    } else {
      std::ofstream out(a.csv);
      if (!out) throw std::runtime_error("cannot write " + a.csv);
      WriteExperimentCsv(out, rows);
    }
    if (!a.svg.empty()) {
      std::ofstream out(a.svg);
      if (!out) throw std::runtime_error("cannot write " + a.svg);
      WriteExperimentSvg(out, rows);
    }
    code = 0;
  });
}

int Main(int argc, char** argv) {
  CLI::App app{"Data-exchange welfare solver and audit toolkit"};
  app.require_subcommand(1);
  int code = 0;
  GenArgs gen;
  SolveArgs solve;
  ExactArgs exact;
  OracleArgs oracle;
  StabilityArgs stability;
  FuzzArgs fuzz;
  AuditArgs audit;
  ExperimentArgs experiment;
  AddGen(app, gen, code);
  AddSolve(app, solve, code);
  AddExact(app, exact, code);
  AddOracle(app, oracle, code);
  AddStability(app, stability, code);
  AddFuzz(app, fuzz, code);
  AddAudit(app, audit, code);
  AddExperiment(app, experiment, code);
  try {
    ConfigureLoggingFromEnv();
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kExitInput;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return code;
}

}  // namespace
}  // namespace dexchange

int main(int argc, char** argv) { return dexchange::Main(argc, argv); }
