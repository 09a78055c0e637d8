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

#include "dexchange/mwu.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "dexchange/exact.h"
#include "dexchange/utility.h"

namespace dexchange {
namespace {

using ColumnKey = std::tuple<AgentId, Subset, std::vector<double>>;

constexpr std::size_t kMaxSparsifyColumns = 5000;

std::atomic<int> g_regret_failures{0};

double ResolveEps(const Instance& instance, const MwuConfig& config) {
  return config.eps < 0.0 ? instance.epsilon() : config.eps;
}

void ValidateConfig(const MwuConfig& config, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("MWU eps must lie in (0, 1)");
  if (!(config.delta > 0.0 && config.delta <= 1.0 / 3.0 + 1e-15)) {
    throw std::invalid_argument("MWU delta must lie in (0, 1/3]");
  }
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (config.eta_override && !(*config.eta_override > 0.0 && *config.eta_override <= 0.5)) {
    throw std::invalid_argument("eta must lie in (0, 1/2]");
  }
  if (config.threads < 1) throw std::invalid_argument("threads must be at least 1");
}

double SumFullUtility(const Instance& instance) {
  double total = 0.0;
  for (int i = 0; i < instance.n(); ++i) total += FullUtility(instance, i);
  return total;
}

std::vector<OracleResult> RunAllOracles(const Instance& instance, OracleKind kind,
                                        const DualPrices& q, double eps, ShareCache* cache,
                                        int threads) {
  const int n = instance.n();
  std::vector<OracleResult> out(n);
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) out[i] = RunOracle(instance, kind, i, q, eps, cache);
    return out;
  }
  // Each agent's result depends only on (i, Q), so the split is invisible.
  std::vector<std::future<void>> jobs;
  const int blocks = std::min(threads, n);
  for (int b = 0; b < blocks; ++b) {
    jobs.push_back(std::async(std::launch::async, [&, b] {
      for (int i = b; i < n; i += blocks) out[i] = RunOracle(instance, kind, i, q, eps, cache);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

ExchangeSolution FromCounts(int n, const std::map<ColumnKey, long>& counts, long total) {
  ExchangeSolution s;
  s.n = n;
  for (const auto& [key, c] : counts) {
    const auto& [agent, senders, fractions] = key;
    s.columns.push_back(Column{agent, senders, static_cast<double>(c) / total, fractions});
  }
  return s;
}

}  // namespace

double TheoreticalIterations(int n, double alpha, double eps) {
  const double ln = std::log(std::max(n, 2));
  return 32.0 * n * n * alpha * alpha * ln / (eps * eps);
}

int RegretAuditFailures() { return g_regret_failures.load(); }

PriceAssembly AssemblePrices(std::span<const double> w, int n, double B, double eps,
                             double alpha) {
  if (static_cast<int>(w.size()) != 2 * n + 1) {
    throw std::invalid_argument("expected 2n + 1 row weights");
  }
  double total = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw std::invalid_argument("row weights must be positive");
    total += v;
  }
  PriceAssembly out;
  out.p.resize(w.size());
  for (std::size_t r = 0; r < w.size(); ++r) out.p[r] = w[r] / total;
  out.q = DualPrices(n);
  const double p0 = out.p[0];
  for (int i = 0; i < n; ++i) {
    const double net_i = out.p[1 + i] - out.p[1 + n + i];
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.q(i, j) = p0 + net_i - (out.p[1 + j] - out.p[1 + n + j]);
    }
  }
  out.threshold = (p0 * B - eps * (1.0 - p0)) / alpha;
  return out;
}

namespace {

MwuOutcome RunFeasibility(const Instance& instance, double B, const MwuConfig& config,
                          OracleKind oracle, ShareCache* cache, std::ostream* trace) {
  const double eps = ResolveEps(instance, config);
  ValidateConfig(config, eps);
  const int n = instance.n();
  const int rows = 2 * n + 1;
  const double alpha = OracleAlpha(instance, oracle, config.oracle_eps);
  const double sum_full = SumFullUtility(instance);
  double slack_cap = 0.0;
  if (config.imbalance) {
    slack_cap = std::max(config.imbalance->cost_delta.Inverse(config.imbalance->budget_delta),
                         config.imbalance->cost_gamma.Inverse(config.imbalance->budget_gamma));
  }
  const double rho = sum_full + eps / alpha + slack_cap;
  const double t_theory = TheoreticalIterations(n, alpha, eps);
  const int T = static_cast<int>(std::max(1.0, std::min<double>(t_theory, config.max_iters)));
  const double eta = config.eta_override.value_or(
      std::min(0.5, std::sqrt(2.0 * std::log(std::max(n, 2)) / T)));

  MwuOutcome out;
  out.telemetry.alpha = alpha;
  out.telemetry.eta = eta;
  out.telemetry.rho = rho;
  if (B > sum_full) {
    // No point of P reaches the welfare row.
    out.iterations = 1;
    return out;
  }

  std::vector<double> w(rows, 1.0);
  std::vector<double> sum_m(rows, 0.0), sum_abs(rows, 0.0);
  double lhs = 0.0;
  std::map<ColumnKey, long> counts;
  double sum_welfare = 0.0;
  std::vector<double> sum_net(n, 0.0), sum_delta(n, 0.0), sum_gamma(n, 0.0);
  std::vector<double> welfare_row(rows);
  long updates = 0;
  bool certified = false;
  ExchangeSolution certificate;
  // Checkpoints double so the LP work stays logarithmic in T.
  long next_certify = config.certify_every;

  for (int t = 1; t <= T; ++t) {
    const PriceAssembly prices = AssemblePrices(w, n, B, eps, alpha);
    const std::vector<OracleResult> picks =
        RunAllOracles(instance, oracle, prices.q, config.oracle_eps, cache, config.threads);
    out.telemetry.oracle_calls += n;
    double value = 0.0;
    for (const OracleResult& r : picks) value += r.value;
    ImbalanceResult slack;
    if (config.imbalance) {
      const std::vector<double> pp(prices.p.begin() + 1, prices.p.begin() + 1 + n);
      const std::vector<double> pm(prices.p.begin() + 1 + n, prices.p.end());
      slack = OracleImbalance(pp, pm, config.imbalance->budget_delta,
                              config.imbalance->budget_gamma, config.imbalance->cost_delta,
                              config.imbalance->cost_gamma);
      value += slack.value;
    }
    out.iterations = t;
    if (value < prices.threshold) {
      out.feasible = false;
      if (trace) {
        *trace << nlohmann::json{{"t", t}, {"B", B}, {"pb_threshold", prices.threshold},
                                 {"oracle_value", value}, {"max_residual", nullptr},
                                 {"infeasible", true}}.dump()
               << '\n';
      }
      break;
    }
    // A x^(t).
    double welfare = 0.0;
    std::vector<double> net(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const OracleResult& r = picks[i];
      if (r.chosen.empty()) continue;
      const std::vector<double> h = cache->Get(i, r.chosen, r.fractions);
      welfare += UtilityFractional(instance, i, r.chosen, r.fractions);
      for (std::size_t k = 0; k < r.chosen.size(); ++k) {
        net[i] += h[k];
        net[r.chosen[k]] -= h[k];
      }
      ++counts[ColumnKey{i, r.chosen, r.fractions}];
    }
    welfare_row[0] = welfare;
    for (int i = 0; i < n; ++i) {
      const double d = config.imbalance ? slack.deltas[i] : 0.0;
      const double g = config.imbalance ? slack.gammas[i] : 0.0;
      welfare_row[1 + i] = net[i] + d;
      welfare_row[1 + n + i] = -net[i] + g;
      sum_net[i] += net[i];
      sum_delta[i] += d;
      sum_gamma[i] += g;
    }
    sum_welfare += welfare;
    // Loss vector m = (A x - b / alpha) / rho with b = (B, -eps, ..., -eps).
    double total_w = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double b = r == 0 ? B : -eps;
      const double m = (welfare_row[r] - b / alpha) / rho;
      out.telemetry.max_abs_loss = std::max(out.telemetry.max_abs_loss, std::abs(m));
      if (std::abs(m) > 1.0 + 1e-12) {
        throw std::logic_error("MWU loss outside [-1, 1]; width bound violated");
      }
      lhs += m * prices.p[r];
      sum_m[r] += m;
      sum_abs[r] += std::abs(m);
      w[r] *= 1.0 - eta * m;
      total_w += w[r];
    }
    for (double& v : w) v /= total_w;
    ++updates;

    // Running average x-bar.
    double max_res = 0.0;
    bool balanced = true;
    for (int i = 0; i < n; ++i) {
      const double res = sum_net[i] / updates;
      max_res = std::max(max_res, std::abs(res));
      if (res < -eps - sum_delta[i] / updates || res > eps + sum_gamma[i] / updates) {
        balanced = false;
      }
    }
    if (trace) {
      *trace << nlohmann::json{{"t", t}, {"B", B}, {"pb_threshold", prices.threshold},
                               {"oracle_value", value}, {"max_residual", max_res}}.dump()
             << '\n';
    }
    // Both exits demand the full target B, which implies the B / alpha the
    // analysis needs; stopping at B / alpha would starve the column pool.
    if (balanced && sum_welfare / updates >= B) {
      out.telemetry.early_exit = true;
      break;
    }
    if (config.certify_every > 0 && t == next_certify && t < T) {
      next_certify *= 2;
      std::vector<Column> cols;
      for (const auto& [key, c] : counts) {
        cols.push_back(Column{std::get<0>(key), std::get<1>(key), 0.0, std::get<2>(key)});
      }
      ColumnLpOptions options;
      options.balance_eps = eps;
      if (config.imbalance) {
        options.deltas = sum_delta;
        options.gammas = sum_gamma;
        for (double& d : options.deltas) d /= updates;
        for (double& g : options.gammas) g /= updates;
      }
      ColumnLpResult lp = MaxWelfareOverColumns(instance, cols, options, cache);
      if (lp.status == LpResult::Status::kOptimal && lp.welfare >= B) {
        certified = true;
        certificate = std::move(lp.solution);
        out.telemetry.early_exit = true;
        break;
      }
    }
  }

  // Regret inequality for every row, over the iterations that updated w.
  const double log_term = std::log(static_cast<double>(rows)) / eta;
  double best_rhs = std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    best_rhs = std::min(best_rhs, sum_m[r] + eta * sum_abs[r] + log_term);
  }
  out.telemetry.regret_lhs = lhs;
  out.telemetry.regret_rhs = best_rhs;
  out.telemetry.regret_ok = lhs <= best_rhs + 1e-9 * (1.0 + std::abs(lhs));
  if (!out.telemetry.regret_ok) {
    g_regret_failures.fetch_add(1);
    spdlog::error("MWU regret audit failed at B={}: lhs {} > rhs {}", B, lhs, best_rhs);
  }
  spdlog::debug("MWU B={} iterations={} regret lhs={} rhs={}", B, out.iterations, lhs,
                best_rhs);

  for (const auto& [key, c] : counts) {
    out.generated.push_back(Column{std::get<0>(key), std::get<1>(key), 0.0, std::get<2>(key)});
  }
  out.telemetry.columns_generated = out.generated.size();
  if (out.iterations > 0 && (updates == out.iterations)) {
    out.feasible = true;
    if (certified) {
      out.solution = std::move(certificate);
    } else {
      out.solution = FromCounts(n, counts, updates);
      if (config.imbalance) {
        out.solution.deltas = sum_delta;
        out.solution.gammas = sum_gamma;
        for (double& d : out.solution.deltas) d /= updates;
        for (double& g : out.solution.gammas) g /= updates;
      }
    }
  }
  return out;
}

}  // namespace

MwuOutcome MwuFeasibility(const Instance& instance, double B, const MwuConfig& config,
                          OracleKind oracle, ShareCache* cache) {
  CheckOracleSupport(instance, oracle);
  ShareCache local(instance);
  std::ofstream trace;
  if (!config.trace_path.empty()) trace.open(config.trace_path, std::ios::app);
  return RunFeasibility(instance, B, config, oracle, cache ? cache : &local,
                        trace.is_open() ? &trace : nullptr);
}

ExchangeSolution Sparsify(const Instance& instance, const ExchangeSolution& solution,
                          ShareCache* cache) {
  const ExchangeSolution merged = MergeColumns(solution);
  if (merged.columns.size() > kMaxSparsifyColumns) {
    spdlog::warn("sparsify skipped: {} columns exceed {}", merged.columns.size(),
                 kMaxSparsifyColumns);
    return solution;
  }
  ColumnLpOptions options;
  options.balance_eps = instance.epsilon();
  options.deltas = solution.deltas;
  options.gammas = solution.gammas;
  ColumnLpResult lp = MaxWelfareOverColumns(instance, merged.columns, options, cache);
  if (lp.status != LpResult::Status::kOptimal) {
    spdlog::warn("sparsify LP failed ({}); keeping the input", StatusName(lp.status));
    return solution;
  }
  return lp.solution;
}

std::pair<ExchangeSolution, SolveReport> SolveWelfare(const Instance& input,
                                                      const MwuConfig& config,
                                                      OracleKind oracle) {
  const double eps = ResolveEps(input, config);
  ValidateConfig(config, eps);
  const Instance instance = eps == input.epsilon() ? input : WithEpsilon(input, eps);
  CheckOracleSupport(instance, oracle);
  ShareCache cache(instance);
  const double alpha = OracleAlpha(instance, oracle, config.oracle_eps);
  const double sum_full = SumFullUtility(instance);

  ExchangeSolution empty;
  empty.n = instance.n();
  auto finish = [&](ExchangeSolution sol, SolveReport base) {
    SolveReport r = Evaluate(instance, sol, &cache);
    r.iterations = base.iterations;
    r.best_B = base.best_B;
    r.diagnostic = base.diagnostic;
    r.telemetry = base.telemetry;
    return std::pair{std::move(sol), std::move(r)};
  };
  SolveReport base;
  base.telemetry.alpha = alpha;
  if (!(sum_full > 0.0) || sum_full < eps) {
    base.diagnostic = "all welfare targets infeasible: total utility below epsilon";
    return finish(empty, base);
  }
  const int top = static_cast<int>(std::floor(std::log(sum_full / eps) / std::log1p(config.delta)));
  auto target = [&](int k) { return eps * std::pow(1.0 + config.delta, k); };

  if (!config.trace_path.empty()) std::ofstream(config.trace_path, std::ios::trunc);
  std::ofstream trace;
  if (!config.trace_path.empty()) trace.open(config.trace_path, std::ios::app);

  std::map<int, MwuOutcome> probes;
  std::map<ColumnKey, long> pool;
  auto feasible = [&](int k) {
    auto it = probes.find(k);
    if (it == probes.end()) {
      MwuOutcome o = RunFeasibility(instance, target(k), config, oracle, &cache,
                                    trace.is_open() ? &trace : nullptr);
      base.iterations += o.iterations;
      base.telemetry.oracle_calls += o.telemetry.oracle_calls;
      base.telemetry.b_probes += 1;
      base.telemetry.max_abs_loss = std::max(base.telemetry.max_abs_loss, o.telemetry.max_abs_loss);
      base.telemetry.regret_ok = base.telemetry.regret_ok && o.telemetry.regret_ok;
      for (const Column& c : o.generated) ++pool[ColumnKey{c.agent, c.senders, c.fractions}];
      spdlog::info("B probe k={} B={:.6g}: {} after {} iterations", k, target(k),
                   o.feasible ? "feasible" : "infeasible", o.iterations);
      it = probes.emplace(k, std::move(o)).first;
    }
    return it->second.feasible;
  };

  if (top < 0 || !feasible(0)) {
    base.diagnostic = "all welfare targets infeasible";
    return finish(empty, base);
  }
  int lo = 0, hi = top + 1, step = 1;
  while (true) {
    const int k = lo + step;
    if (k > top) break;
    if (feasible(k)) {
      lo = k;
      step *= 2;
    } else {
      hi = k;
      break;
    }
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (feasible(mid) ? lo : hi) = mid;
  }
  const MwuOutcome& best = probes.at(lo);
  base.best_B = target(lo);
  base.telemetry.eta = best.telemetry.eta;
  base.telemetry.rho = best.telemetry.rho;
  base.telemetry.regret_lhs = best.telemetry.regret_lhs;
  base.telemetry.regret_rhs = best.telemetry.regret_rhs;
  base.telemetry.early_exit = best.telemetry.early_exit;
  base.telemetry.guarantee = base.best_B / (2.0 * alpha * (1.0 + 3.0 * config.delta));

  // Final columns: the pool (most frequent first when over the cap), plus
  // the best probe's own support.
  std::vector<Column> columns;
  if (config.pool_columns) {
    std::vector<std::pair<long, ColumnKey>> ranked;
    for (const auto& [key, c] : pool) ranked.emplace_back(-c, key);
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [c, key] : ranked) {
      if (columns.size() >= kMaxSparsifyColumns) break;
      columns.push_back(Column{std::get<0>(key), std::get<1>(key), 0.0, std::get<2>(key)});
    }
  }
  for (const Column& c : best.solution.columns) columns.push_back(c);
  ColumnLpOptions options;
  options.balance_eps = eps;
  options.deltas = best.solution.deltas;
  options.gammas = best.solution.gammas;
  base.telemetry.columns_generated = pool.size();
  ColumnLpResult lp = MaxWelfareOverColumns(instance, columns, options, &cache);
  if (lp.status == LpResult::Status::kOptimal) {
    base.telemetry.sparsified = true;
    return finish(std::move(lp.solution), base);
  }
  spdlog::warn("final column LP failed ({}); returning the iterate average",
               StatusName(lp.status));
  base.diagnostic = "column LP failed; average of iterates returned";
  return finish(best.solution, base);
}

}  // namespace dexchange
