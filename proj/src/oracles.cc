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

#include "dexchange/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

constexpr double kMicroUnits = 1e6;

bool IsSizeProportional(const Instance& instance) {
  return instance.sharing().kind == SharingRuleSpec::Kind::kProportional &&
         instance.sharing().weight_rule == SharingRuleSpec::WeightRule::kSize;
}

Subset SubsetOfLocal(const Instance& instance, AgentId agent,
                     const std::vector<int>& local) {
  Subset s;
  s.reserve(local.size());
  for (int k : local) s.push_back(instance.senders(agent)[k]);
  return s;
}

// Best sum of p_i x_i subject to sum g(x_i) <= budget, x >= 0.
std::vector<double> SolveImbalanceSide(const std::vector<double>& p, double budget,
                                       const ConvexCost& g) {
  std::vector<double> x(p.size(), 0.0);
  double top = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("imbalance prices must be non-negative");
    top = std::max(top, v);
  }
  if (budget <= 0.0 || top <= 0.0) return x;
  if (g.exponent == 1.0) {
    const auto it = std::max_element(p.begin(), p.end());
    x[it - p.begin()] = g.Inverse(budget);
    return x;
  }
  // Stationarity p_i = lambda g'(x_i) gives x_i proportional to
  // p_i^{1/(q-1)}; the scale makes the budget tight.
  const double q = g.exponent;
  const double e = 1.0 / (q - 1.0);
  double mass = 0.0;
  std::vector<double> base(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    base[i] = std::pow(p[i] / top, e);  // scaled by top for range safety
    mass += std::pow(base[i], q);
  }
  const double t = std::pow(budget / (g.coefficient * mass), 1.0 / q);
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = t * base[i];
  return x;
}

}  // namespace

double OracleObjective(const Instance& instance, AgentId agent, const DualPrices& q,
                       std::span<const AgentId> senders, std::span<const double> fractions,
                       ShareCache* cache) {
  if (senders.empty()) return 0.0;
  const std::vector<double> h = cache ? cache->Get(agent, senders, fractions)
                                      : Shares(instance, agent, senders, fractions);
  double v = 0.0;
  for (std::size_t k = 0; k < senders.size(); ++k) v += q(agent, senders[k]) * h[k];
  return v;
}

OracleResult OracleBruteforce(const Instance& instance, AgentId agent,
                              const DualPrices& q, ShareCache* cache) {
  const std::span<const AgentId> all = instance.senders(agent);
  const int k = static_cast<int>(all.size());
  if (k > kMaxEnumerableSenders) {
    throw std::invalid_argument("brute-force oracle limited to " +
                                std::to_string(kMaxEnumerableSenders) + " senders");
  }
  OracleResult best;
  Subset s;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    s.clear();
    for (int b = 0; b < k; ++b) {
      if (mask & (1u << b)) s.push_back(all[b]);
    }
    const double v = OracleObjective(instance, agent, q, s, {}, cache);
    if (v > best.value) {
      best.value = v;
      best.chosen = s;
    }
  }
  best.guesses = 1;
  return best;
}

double BucketingAlpha(int n, double eps) {
  if (n < 2) return 1.0;
  return std::max(1.0, 3.0 * std::numbers::e * (1.0 + 3.0 * eps) * std::log(n));
}

OracleResult OracleBucketing(const Instance& instance, AgentId agent,
                             const DualPrices& q, double eps, ShareCache* cache) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw std::invalid_argument("bucketing oracle needs eps in (0, 1/2)");
  }
  const int n = instance.n();
  const std::span<const AgentId> all = instance.senders(agent);
  const double alpha_hat = BucketingAlpha(n, eps);
  const double tiny = eps * eps / (static_cast<double>(n) * n);

  struct Candidate {
    int local;
    double price;
    double single;
  };
  std::vector<Candidate> cands;
  double max_q = 0.0, max_u = 0.0, lo = 0.0;
  for (int k = 0; k < static_cast<int>(all.size()); ++k) {
    const double price = q(agent, all[k]);
    if (!(price > 0.0)) continue;
    const double single = SingletonUtility(instance, agent, all[k]);
    if (single < tiny || single <= 0.0) continue;
    cands.push_back({k, price, single});
    max_q = std::max(max_q, price);
    max_u = std::max(max_u, single);
    lo = std::max(lo, price * single);
  }
  OracleResult result;
  if (cands.empty()) return result;

  const int buckets = 3 * static_cast<int>(std::ceil(std::log(n / eps)));
  auto attempt = [&](double guess, OracleResult* out) {
    const double u0 = eps * guess / n;
    std::vector<std::vector<int>> bucket(buckets);
    for (const Candidate& c : cands) {
      if (c.price * c.single < u0) continue;
      // price in (u0 e^k, u0 e^{k+1}]
      const int k = static_cast<int>(std::ceil(std::log(c.price / u0))) - 1;
      if (k < 0 || k >= buckets) continue;
      bucket[k].push_back(c.local);
    }
    OracleResult r;
    for (int k = 0; k < buckets; ++k) {
      if (bucket[k].empty()) continue;
      const Subset s = SubsetOfLocal(instance, agent, bucket[k]);
      const double v = OracleObjective(instance, agent, q, s, {}, cache);
      if (v > r.value) {
        r.value = v;
        r.chosen = s;
      }
    }
    *out = std::move(r);
    return out->value >= guess / alpha_hat;
  };

  // Largest valid guess, sweeping down from n * max Q * max u. The smallest
  // guess max_j Q_ij u_ij is always valid because alpha_hat >= e.
  double guess = n * max_q * max_u;
  int tried = 0;
  OracleResult current;
  while (true) {
    ++tried;
    if (attempt(guess, &current)) break;
    if (guess <= lo) break;
    guess = std::max(lo, guess / (1.0 + eps));
  }
  current.guesses = tried;
  return current;
}

std::vector<int> KnapsackFptas(const std::vector<double>& profits,
                               const std::vector<std::int64_t>& weights,
                               std::int64_t capacity, double eps) {
  if (profits.size() != weights.size()) {
    throw std::invalid_argument("profits and weights must have equal length");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("knapsack eps must be positive");
  std::vector<int> items;
  double max_p = 0.0;
  for (std::size_t j = 0; j < profits.size(); ++j) {
    if (weights[j] < 0) throw std::invalid_argument("knapsack weights must be non-negative");
    if (profits[j] > 0.0 && weights[j] <= capacity) {
      items.push_back(static_cast<int>(j));
      max_p = std::max(max_p, profits[j]);
    }
  }
  if (items.empty()) return {};
  const int m = static_cast<int>(items.size());
  const double unit = eps * max_p / m;
  std::vector<int> scaled(m);
  int total = 0;
  for (int a = 0; a < m; ++a) {
    scaled[a] = static_cast<int>(std::floor(profits[items[a]] / unit));
    total += scaled[a];
  }
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  // min_weight[a][P]: least weight reaching scaled profit exactly P with the
  // first a items.
  std::vector<std::vector<std::int64_t>> min_weight(
      m + 1, std::vector<std::int64_t>(total + 1, kInf));
  min_weight[0][0] = 0;
  for (int a = 1; a <= m; ++a) {
    const int pa = scaled[a - 1];
    const std::int64_t wa = weights[items[a - 1]];
    for (int p = 0; p <= total; ++p) {
      std::int64_t best = min_weight[a - 1][p];
      if (p >= pa && min_weight[a - 1][p - pa] < kInf) {
        best = std::min(best, min_weight[a - 1][p - pa] + wa);
      }
      min_weight[a][p] = best;
    }
  }
  int p = total;
  while (p > 0 && min_weight[m][p] > capacity) --p;
  std::vector<int> chosen;
  for (int a = m; a >= 1; --a) {
    if (min_weight[a][p] == min_weight[a - 1][p]) continue;
    chosen.push_back(items[a - 1]);
    p -= scaled[a - 1];
  }
  std::reverse(chosen.begin(), chosen.end());
  return chosen;
}

OracleResult OracleKnapsack(const Instance& instance, AgentId agent,
                            const DualPrices& q, double eps) {
  if (!instance.IsSymmetricWeighted() || !IsSizeProportional(instance)) {
    throw std::invalid_argument(
        "knapsack oracle needs symmetric weighted utilities with size-proportional sharing");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("knapsack oracle needs eps in (0, 1)");
  const std::span<const AgentId> all = instance.senders(agent);
  std::vector<int> local;
  std::vector<double> profits;
  std::vector<std::int64_t> weights;
  for (int k = 0; k < static_cast<int>(all.size()); ++k) {
    const double price = q(agent, all[k]);
    const double s = instance.Size(agent, all[k]);
    if (!(price > 0.0) || !(s > 0.0)) continue;
    local.push_back(k);
    profits.push_back(price * s);
    weights.push_back(std::max<std::int64_t>(1, std::llround(s * kMicroUnits)));
  }
  OracleResult best;
  if (local.empty()) return best;
  const std::int64_t lo = *std::min_element(weights.begin(), weights.end());
  const std::int64_t hi = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
  const double inner_eps = eps / (1.0 + eps);
  std::int64_t phi = lo;
  while (true) {
    ++best.guesses;
    const std::vector<int> pick = KnapsackFptas(profits, weights, phi, inner_eps);
    std::vector<int> chosen_local;
    for (int a : pick) chosen_local.push_back(local[a]);
    const Subset s = SubsetOfLocal(instance, agent, chosen_local);
    const double v = OracleObjective(instance, agent, q, s);
    if (v > best.value) {
      best.value = v;
      best.chosen = s;
    }
    if (phi >= hi) break;
    phi = std::min(hi, std::max(phi + 1, static_cast<std::int64_t>(
                                             std::floor(phi * (1.0 + eps)))));
  }
  return best;
}

OracleResult OracleContinuous(const Instance& instance, AgentId agent,
                              const DualPrices& q, double eps) {
  if (!instance.IsContinuous()) throw std::invalid_argument("unsupported concave family");
  if (!IsSizeProportional(instance)) {
    throw std::invalid_argument("continuous oracle needs size-proportional sharing");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("continuous oracle needs eps in (0, 1)");
  const AgentView& view = instance.view(agent);
  const std::span<const AgentId> all = instance.senders(agent);
  auto value_of = [&](double d) { return view.multiplier * (*view.concave)(d); };

  std::vector<int> pos;
  double s_min = std::numeric_limits<double>::infinity(), s_sum = 0.0;
  for (int k = 0; k < static_cast<int>(all.size()); ++k) {
    if (q(agent, all[k]) > 0.0 && view.sizes[k] > 0.0) {
      pos.push_back(k);
      s_min = std::min(s_min, view.sizes[k]);
      s_sum += view.sizes[k];
    }
  }
  OracleResult best;
  if (pos.empty()) return best;
  std::stable_sort(pos.begin(), pos.end(), [&](int a, int b) {
    return q(agent, all[a]) > q(agent, all[b]);
  });
  const double v_max = value_of(s_min) / s_min;
  const double v_min = value_of(s_sum) / s_sum;
  auto capacity = [&](double v) {
    if (value_of(s_sum) >= v * s_sum) return s_sum;
    double lo = s_min, hi = s_sum;
    const double tol = 1e-10 * (s_sum - s_min);
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (value_of(mid) >= v * mid ? lo : hi) = mid;
    }
    return lo;
  };
  double v = v_max;
  while (true) {
    ++best.guesses;
    double room = capacity(v);
    std::vector<std::pair<AgentId, double>> take;
    for (int k : pos) {
      if (room <= 0.0) break;
      const double y = std::min(1.0, room / view.sizes[k]);
      take.emplace_back(all[k], y);
      room -= y * view.sizes[k];
    }
    std::sort(take.begin(), take.end());
    Subset s;
    std::vector<double> y;
    for (const auto& [j, f] : take) {
      s.push_back(j);
      y.push_back(f);
    }
    const double got = OracleObjective(instance, agent, q, s, y);
    if (got > best.value) {
      best.value = got;
      best.chosen = s;
      best.fractions = y;
    }
    if (v <= v_min) break;
    v = std::max(v_min, v / (1.0 + eps));
  }
  return best;
}

double ConvexCost::operator()(double x) const {
  return coefficient * std::pow(std::max(0.0, x), exponent);
}

double ConvexCost::Inverse(double budget) const {
  if (budget <= 0.0) return 0.0;
  return std::pow(budget / coefficient, 1.0 / exponent);
}

ImbalanceResult OracleImbalance(const std::vector<double>& p, const std::vector<double>& r,
                                double c_delta, double c_gamma, const ConvexCost& g,
                                const ConvexCost& h) {
  for (const ConvexCost* c : {&g, &h}) {
    if (!(c->coefficient > 0.0) || !(c->exponent >= 1.0) || !std::isfinite(c->exponent)) {
      throw std::invalid_argument("imbalance cost must be convex: coefficient > 0, exponent >= 1");
    }
  }
  if (c_delta < 0.0 || c_gamma < 0.0) {
    throw std::invalid_argument("imbalance budgets must be non-negative");
  }
  ImbalanceResult out;
  out.deltas = SolveImbalanceSide(p, c_delta, g);
  out.gammas = SolveImbalanceSide(r, c_gamma, h);
  for (std::size_t i = 0; i < p.size(); ++i) out.value += p[i] * out.deltas[i];
  for (std::size_t i = 0; i < r.size(); ++i) out.value += r[i] * out.gammas[i];
  return out;
}

OracleKind ParseOracleKind(const std::string& name) {
  if (name == "bruteforce") return OracleKind::kBruteforce;
  if (name == "bucketing") return OracleKind::kBucketing;
  if (name == "knapsack") return OracleKind::kKnapsack;
  if (name == "continuous") return OracleKind::kContinuous;
  throw std::invalid_argument("unknown oracle '" + name + "'");
}

std::string OracleKindName(OracleKind kind) {
  switch (kind) {
    case OracleKind::kBruteforce: return "bruteforce";
    case OracleKind::kBucketing: return "bucketing";
    case OracleKind::kKnapsack: return "knapsack";
    case OracleKind::kContinuous: return "continuous";
  }
  return "unknown";
}

void CheckOracleSupport(const Instance& instance, OracleKind kind) {
  switch (kind) {
    case OracleKind::kBruteforce:
      for (int i = 0; i < instance.n(); ++i) {
        if (static_cast<int>(instance.senders(i).size()) > kMaxEnumerableSenders) {
          throw std::invalid_argument("brute-force oracle limited to " +
                                      std::to_string(kMaxEnumerableSenders) + " senders");
        }
      }
      return;
    case OracleKind::kBucketing:
      if (!IsCrossMonotoneRule(instance)) {
        throw std::invalid_argument("bucketing oracle needs cross-monotone (Shapley) sharing");
      }
      return;
    case OracleKind::kKnapsack:
      if (!instance.IsSymmetricWeighted() || !IsSizeProportional(instance)) {
        throw std::invalid_argument(
            "knapsack oracle needs symmetric weighted utilities with size-proportional sharing");
      }
      return;
    case OracleKind::kContinuous:
      if (!instance.IsContinuous()) throw std::invalid_argument("unsupported concave family");
      if (!IsSizeProportional(instance)) {
        throw std::invalid_argument("continuous oracle needs size-proportional sharing");
      }
      return;
  }
}

double OracleAlpha(const Instance& instance, OracleKind kind, double eps) {
  switch (kind) {
    case OracleKind::kBruteforce: return 1.0;
    case OracleKind::kBucketing: return BucketingAlpha(instance.n(), eps);
    case OracleKind::kKnapsack: return (1.0 + eps) * (1.0 + eps);
    case OracleKind::kContinuous: return 1.0 + eps;
  }
  return 1.0;
}

OracleResult RunOracle(const Instance& instance, OracleKind kind, AgentId agent,
                       const DualPrices& q, double eps, ShareCache* cache) {
  switch (kind) {
    case OracleKind::kBruteforce: return OracleBruteforce(instance, agent, q, cache);
    case OracleKind::kBucketing: return OracleBucketing(instance, agent, q, eps, cache);
    case OracleKind::kKnapsack: return OracleKnapsack(instance, agent, q, eps);
    case OracleKind::kContinuous: return OracleContinuous(instance, agent, q, eps);
  }
  return {};
}

}  // namespace dexchange
