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

#include "dexchange/experiment.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <spdlog/spdlog.h>

#include "dexchange/exact.h"

namespace dexchange {
namespace {

constexpr int kMaxMatchingAgents = 24;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct Job {
  CorrelationMode mode;
  double rho;
  int replicate;
};

std::vector<ExperimentRow> RunReplicate(const ExperimentConfig& config, const Job& job) {
  RoadSpec spec = config.road;
  spec.correlation = job.mode;
  spec.rho = job.rho;
  // Same seed across the sweep: only the correlation structure changes.
  spec.seed = Mix64(config.seed + static_cast<std::uint64_t>(job.replicate));
  const RoadInstance road = GenRoad(config.graph, spec);
  const Instance& instance = road.instance;

  std::vector<ExperimentRow> rows;
  auto add = [&](const std::string& method, double normalized, bool balanced) {
    ExperimentRow r;
    r.replicate = job.replicate;
    r.method = method;
    r.total_utility = normalized * road.scale;
    r.fraction_of_baseline_variance =
        road.baseline_variance > 0.0 ? r.total_utility / road.baseline_variance : 0.0;
    r.correlation_mode = CorrelationModeName(job.mode);
    r.rho = job.rho;
    r.seed = spec.seed;
    r.balanced = balanced;
    rows.push_back(std::move(r));
  };
  add("baseline", 0.0, true);

  const ExchangeSolution matching = MatchingBenchmark(instance, instance.epsilon());
  const SolveReport mr = Evaluate(instance, matching);
  add("matching", mr.welfare, mr.feasible);

  MwuConfig mwu = config.mwu;
  mwu.seed = spec.seed;
  const auto [solution, report] = SolveWelfare(instance, mwu, config.oracle);
  add("mwu", report.welfare, report.feasible);
  spdlog::info("replicate {} mode {} rho {}: matching {:.4f} mwu {:.4f}", job.replicate,
               CorrelationModeName(job.mode), job.rho, mr.welfare, report.welfare);
  return rows;
}

void BoxPlot(std::ostream& out, double x, double width, const std::vector<double>& values,
             double y0, double y_scale, const char* colour) {
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  auto y = [&](double value) { return y0 - value * y_scale; };
  const double mid = x + width / 2;
  out << "<line x1=\"" << mid << "\" x2=\"" << mid << "\" y1=\"" << y(v.front()) << "\" y2=\""
      << y(v.back()) << "\" stroke=\"black\"/>\n";
  out << "<rect x=\"" << x << "\" y=\"" << y(q(0.75)) << "\" width=\"" << width
      << "\" height=\"" << std::max(0.5, y(q(0.25)) - y(q(0.75))) << "\" fill=\"" << colour
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x << "\" x2=\"" << x + width << "\" y1=\"" << y(q(0.5)) << "\" y2=\""
      << y(q(0.5)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
}

}  // namespace

PairTrade PairwiseOptimum(const Instance& instance, AgentId i, AgentId j, double eps) {
  std::vector<Column> columns;
  if (instance.Permitted(i, j)) columns.push_back(Column{i, {j}, 0.0, {}});
  if (instance.Permitted(j, i)) columns.push_back(Column{j, {i}, 0.0, {}});
  PairTrade out;
  out.solution.n = instance.n();
  if (columns.empty()) return out;
  ColumnLpOptions options;
  options.balance_eps = eps;
  ColumnLpResult r = MaxWelfareOverColumns(instance, columns, options);
  if (r.status != LpResult::Status::kOptimal) {
    throw std::runtime_error("pairwise LP failed: " + StatusName(r.status));
  }
  out.welfare = r.welfare;
  out.solution = std::move(r.solution);
  return out;
}

std::vector<std::pair<int, int>> MaxWeightMatching(const std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  if (n > kMaxMatchingAgents) throw std::invalid_argument("matching limited to 24 agents");
  // best[mask]: heaviest matching using only agents in mask. The lowest agent
  // of mask is either left out or matched to another member.
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> best(full, 0.0);
  std::vector<int> choice(full, -1);  // partner of the lowest agent, -1 if unmatched
  for (std::size_t mask = 1; mask < full; ++mask) {
    const int low = std::countr_zero(mask);
    const std::size_t rest = mask & (mask - 1);
    best[mask] = best[rest];
    for (std::size_t m = rest; m; m &= m - 1) {
      const int j = std::countr_zero(m);
      if (w[low][j] <= 0.0) continue;
      const double v = w[low][j] + best[rest & ~(std::size_t{1} << j)];
      if (v > best[mask] + 1e-15) {
        best[mask] = v;
        choice[mask] = j;
      }
    }
  }
  std::vector<std::pair<int, int>> out;
  std::size_t mask = full - 1;
  while (mask) {
    const int low = std::countr_zero(mask);
    const int j = choice[mask];
    mask &= mask - 1;
    if (j >= 0) {
      out.emplace_back(low, j);
      mask &= ~(std::size_t{1} << j);
    }
  }
  return out;
}

ExchangeSolution MatchingBenchmark(const Instance& instance, double eps) {
  const int n = instance.n();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  std::map<std::pair<int, int>, ExchangeSolution> trades;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairTrade t = PairwiseOptimum(instance, i, j, eps);
      w[i][j] = w[j][i] = t.welfare;
      if (t.welfare > 0.0) trades.emplace(std::pair{i, j}, std::move(t.solution));
    }
  }
  ExchangeSolution s;
  s.n = n;
  for (const auto& [i, j] : MaxWeightMatching(w)) {
    const ExchangeSolution& t = trades.at({i, j});
    s.columns.insert(s.columns.end(), t.columns.begin(), t.columns.end());
  }
  return MergeColumns(s);
}

std::vector<ExperimentRow> RunExperiment(const ExperimentConfig& config) {
  if (config.replicates < 1) throw std::invalid_argument("need at least one replicate");
  const bool has_none = std::find(config.modes.begin(), config.modes.end(),
                                  CorrelationMode::kNone) != config.modes.end();
  std::vector<Job> jobs;
  for (CorrelationMode mode : config.modes) {
    for (double rho : config.rhos) {
      if (mode == CorrelationMode::kNone && rho != 0.0) continue;
      if (mode != CorrelationMode::kNone && rho == 0.0 && has_none) continue;
      for (int r = 0; r < config.replicates; ++r) jobs.push_back({mode, rho, r});
    }
  }
  std::vector<std::vector<ExperimentRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&]() {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        results[k] = RunReplicate(config, jobs[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<ExperimentRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return std::tie(a.correlation_mode, a.rho, a.replicate, a.method) <
           std::tie(b.correlation_mode, b.rho, b.replicate, b.method);
  });
  return rows;
}

void WriteExperimentCsv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "replicate,method,total_utility,fraction_of_baseline_variance,correlation_mode,rho,seed\n";
  for (const ExperimentRow& r : rows) {
    out << r.replicate << ',' << r.method << ',' << Fmt(r.total_utility) << ','
        << Fmt(r.fraction_of_baseline_variance) << ',' << r.correlation_mode << ',' << Fmt(r.rho)
        << ',' << r.seed << '\n';
  }
}

void WriteExperimentSvg(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  std::map<std::pair<std::string, double>, std::map<std::string, std::vector<double>>> groups;
  double top = 0.0;
  for (const ExperimentRow& r : rows) {
    if (r.method == "baseline") continue;
    groups[{r.correlation_mode, r.rho}][r.method].push_back(r.fraction_of_baseline_variance);
    top = std::max(top, r.fraction_of_baseline_variance);
  }
  const double group_width = 90.0, height = 300.0, margin = 40.0;
  const double width = margin * 2 + group_width * std::max<std::size_t>(1, groups.size());
  const double y0 = margin + height;
  const double y_scale = top > 0.0 ? height / (top * 1.1) : 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << y0 + 2 * margin << "\">\n";
  out << "<line x1=\"" << margin << "\" x2=\"" << width - margin << "\" y1=\"" << y0
      << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  double x = margin;
  for (const auto& [key, methods] : groups) {
    if (auto it = methods.find("matching"); it != methods.end()) {
      BoxPlot(out, x + 10, 30, it->second, y0, y_scale, "#9ecae1");
    }
    if (auto it = methods.find("mwu"); it != methods.end()) {
      BoxPlot(out, x + 50, 30, it->second, y0, y_scale, "#fdae6b");
    }
    out << "<text x=\"" << x + 10 << "\" y=\"" << y0 + 20 << "\" font-size=\"11\">" << key.first
        << " " << Fmt(key.second) << "</text>\n";
    x += group_width;
  }
  out << "<text x=\"" << margin << "\" y=\"" << margin / 2
      << "\" font-size=\"12\">fraction of baseline variance: matching (blue), mwu (orange)"
      << "</text>\n</svg>\n";
}

}  // namespace dexchange
