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

#include "dexchange/instances.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dexchange/utility.h"

namespace dexchange {
namespace {

constexpr int kMaxRedraws = 1000;
constexpr int kMaxPathRetries = 200;

void CheckX3C(const X3CSpec& spec) {
  if (spec.m < 1 || spec.k < 1) throw std::invalid_argument("x3c needs m >= 1 and k >= 1");
  if (static_cast<int>(spec.sets.size()) != spec.m) {
    throw std::invalid_argument("x3c needs exactly m sets");
  }
  for (const auto& s : spec.sets) {
    for (int e : s) {
      if (e < 0 || e >= 3 * spec.k) throw std::invalid_argument("x3c element out of range");
    }
    if (s[0] == s[1] || s[0] == s[2] || s[1] == s[2]) {
      throw std::invalid_argument("x3c sets need three distinct elements");
    }
  }
  if (spec.known_cover) {
    const auto& c = *spec.known_cover;
    if (static_cast<int>(c.size()) != spec.k) throw std::invalid_argument("cover needs k sets");
    std::vector<char> hit(3 * spec.k, 0);
    for (int idx : c) {
      if (idx < 0 || idx >= spec.m) throw std::invalid_argument("cover index out of range");
      for (int e : spec.sets[idx]) {
        if (hit[e]++) throw std::invalid_argument("known cover is not a partition");
      }
    }
  }
}

std::array<int, 3> RandomTriple(KeyedRng& rng, int universe) {
  std::array<int, 3> t{};
  t[0] = static_cast<int>(rng.Below(universe));
  do t[1] = static_cast<int>(rng.Below(universe)); while (t[1] == t[0]);
  do t[2] = static_cast<int>(rng.Below(universe)); while (t[2] == t[0] || t[2] == t[1]);
  std::sort(t.begin(), t.end());
  return t;
}

bool CoverSearch(const X3CSpec& spec, int next, std::vector<char>& hit, int covered,
                 std::vector<int>& chosen) {
  if (covered == 3 * spec.k) return true;
  if (static_cast<int>(chosen.size()) == spec.k) return false;
  for (int i = next; i < spec.m; ++i) {
    const auto& s = spec.sets[i];
    if (hit[s[0]] || hit[s[1]] || hit[s[2]]) continue;
    for (int e : s) hit[e] = 1;
    chosen.push_back(i);
    if (CoverSearch(spec, i + 1, hit, covered + 3, chosen)) return true;
    chosen.pop_back();
    for (int e : s) hit[e] = 0;
  }
  return false;
}

// Agents i < n - 1 receive from i + 1; agent n - 1 receives from 0; agent 0
// also receives from n - 1.
std::vector<std::pair<AgentId, AgentId>> CoreGapPairs(int n) {
  std::vector<std::pair<AgentId, AgentId>> allowed;
  for (int i = 0; i + 1 < n; ++i) allowed.emplace_back(i, i + 1);
  allowed.emplace_back(n - 1, 0);
  allowed.emplace_back(0, n - 1);
  return allowed;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int Find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void Join(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<int> Bfs(const std::vector<std::vector<int>>& adj, int source,
                     std::vector<int>* parent) {
  std::vector<int> depth(adj.size(), -1);
  if (parent) parent->assign(adj.size(), -1);
  std::deque<int> queue{source};
  depth[source] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : adj[v]) {
      if (depth[u] >= 0) continue;
      depth[u] = depth[v] + 1;
      if (parent) (*parent)[u] = v;
      queue.push_back(u);
    }
  }
  return depth;
}

bool ParseId(std::string_view s, long long* out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), *out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && *out >= 0;
}

}  // namespace

X3CInstance GenX3C(const X3CSpec& spec) {
  CheckX3C(spec);
  const int m = spec.m;
  const int k = spec.k;
  const X3CLayout L{m};
  InstanceData d;
  d.n = 2 * m + 3;
  d.epsilon = 0.0;
  for (int i = 0; i < m; ++i) {
    d.allowed.emplace_back(L.w(), L.p(i));
    d.allowed.emplace_back(L.w(), L.q(i));
    d.allowed.emplace_back(L.p(i), L.z1());
    d.allowed.emplace_back(L.q(i), L.z2());
  }
  d.allowed.emplace_back(L.z1(), L.w());
  d.allowed.emplace_back(L.z2(), L.w());

  CoverageModel cov;
  // w: 3k universe elements then m dummies; P_i gains dummy i, Q_i is {dummy i}.
  CoverageModel::AgentCoverage w{L.w(), std::vector<double>(3 * k + m, 1.0), {}};
  for (int i = 0; i < m; ++i) {
    std::vector<int> elems(spec.sets[i].begin(), spec.sets[i].end());
    elems.push_back(3 * k + i);
    w.covers.push_back({L.p(i), std::move(elems)});
    w.covers.push_back({L.q(i), {3 * k + i}});
  }
  cov.agents.push_back(std::move(w));
  for (int i = 0; i < m; ++i) {
    cov.agents.push_back({L.p(i), {4.0}, {{L.z1(), {0}}}});
    cov.agents.push_back({L.q(i), {1.0}, {{L.z2(), {0}}}});
  }
  cov.agents.push_back({L.z1(), {3.5 * k}, {{L.w(), {0}}}});
  cov.agents.push_back({L.z2(), {m - 0.5 * k}, {{L.w(), {0}}}});
  d.utility.payload = std::move(cov);
  d.sharing.kind = SharingRuleSpec::Kind::kShapleyExact;

  Instance instance(std::move(d));
  const double scale = MaxFullUtility(instance);
  return X3CInstance{std::move(instance), scale, L, 3.0 * (m + 3 * k)};
}

std::optional<std::vector<int>> FindExactCover(const X3CSpec& spec) {
  CheckX3C(spec);
  std::vector<char> hit(3 * spec.k, 0);
  std::vector<int> chosen;
  if (CoverSearch(spec, 0, hit, 0, chosen)) return chosen;
  return std::nullopt;
}

X3CSpec RandomX3C(int m, int k, bool want_cover, std::uint64_t seed) {
  if (m < k || k < 1) throw std::invalid_argument("need m >= k >= 1");
  KeyedRng rng(seed);
  X3CSpec spec;
  spec.m = m;
  spec.k = k;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    spec.sets.clear();
    if (want_cover) {
      std::vector<int> perm(3 * k);
      std::iota(perm.begin(), perm.end(), 0);
      for (int a = 3 * k - 1; a > 0; --a) std::swap(perm[a], perm[rng.Below(a + 1)]);
      for (int b = 0; b < k; ++b) {
        std::array<int, 3> t{perm[3 * b], perm[3 * b + 1], perm[3 * b + 2]};
        std::sort(t.begin(), t.end());
        spec.sets.push_back(t);
      }
    }
    while (static_cast<int>(spec.sets.size()) < m) spec.sets.push_back(RandomTriple(rng, 3 * k));
    // Shuffle so the planted cover is not always the first k sets.
    for (int a = m - 1; a > 0; --a) std::swap(spec.sets[a], spec.sets[rng.Below(a + 1)]);
    const bool has_cover = FindExactCover(spec).has_value();
    if (has_cover == want_cover) {
      if (want_cover) spec.known_cover = FindExactCover(spec);
      return spec;
    }
  }
  throw std::invalid_argument("could not draw an x3c instance of the requested kind");
}

ExchangeSolution X3CWitness(const X3CInstance& gadget, const std::vector<int>& cover) {
  const X3CLayout& L = gadget.layout;
  const int m = L.m;
  std::vector<char> in_cover(m, 0);
  for (int i : cover) in_cover.at(i) = 1;
  ExchangeSolution s;
  s.n = gadget.instance.n();
  Column to_w{L.w(), {}, 1.0, {}};
  for (int i = 0; i < m; ++i) {
    if (in_cover[i]) to_w.senders.push_back(L.p(i));
  }
  for (int i = 0; i < m; ++i) to_w.senders.push_back(L.q(i));
  s.columns.push_back(std::move(to_w));
  for (int i = 0; i < m; ++i) {
    if (in_cover[i]) s.columns.push_back(Column{L.p(i), {L.z1()}, 7.0 / 8.0, {}});
    s.columns.push_back(Column{L.q(i), {L.z2()}, in_cover[i] ? 0.5 : 1.0, {}});
  }
  s.columns.push_back(Column{L.z1(), {L.w()}, 1.0, {}});
  s.columns.push_back(Column{L.z2(), {L.w()}, 1.0, {}});
  return s;
}

Instance GenCoreGap(int n) {
  if (n < 6) throw std::invalid_argument("core-gap instance needs n >= 6");
  const double heavy = n - 3.0;
  InstanceData d;
  d.n = n;
  d.epsilon = 0.0;
  d.allowed = CoreGapPairs(n);
  SymmetricWeightedModel model;
  model.sizes.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i + 1 < n; ++i) model.sizes[i][i + 1] = 1.0;
  model.sizes[n - 1][0] = heavy;
  model.sizes[0][n - 1] = heavy;
  model.concave.assign(n, ConcaveSpec::Sqrt());
  d.utility.payload = std::move(model);
  d.sharing.kind = SharingRuleSpec::Kind::kProportional;
  d.sharing.weight_rule = SharingRuleSpec::WeightRule::kSize;
  return Instance(std::move(d));
}

ExchangeSolution CoreGapLongCycle(int n) {
  if (n < 6) throw std::invalid_argument("core-gap instance needs n >= 6");
  ExchangeSolution s;
  s.n = n;
  for (int i = 0; i + 1 < n; ++i) s.columns.push_back(Column{i, {i + 1}, 1.0, {}});
  s.columns.push_back(Column{n - 1, {0}, 1.0 / std::sqrt(n - 3.0), {}});
  return s;
}

ExchangeSolution CoreGapPair(int n) {
  if (n < 6) throw std::invalid_argument("core-gap instance needs n >= 6");
  ExchangeSolution s;
  s.n = n;
  s.columns.push_back(Column{0, {n - 1}, 1.0, {}});
  s.columns.push_back(Column{n - 1, {0}, 1.0, {}});
  return s;
}

Instance GenRandom(const RandomSpec& spec) {
  if (spec.n < 1 || spec.senders_per_agent < 0 || spec.elements < 1) {
    throw std::invalid_argument("random instance parameters must be positive");
  }
  const int n = spec.n;
  const int per = std::min(spec.senders_per_agent, n - 1);
  KeyedRng rng(Mix64(spec.seed) ^ 0x7261ULL);
  InstanceData d;
  d.n = n;
  d.epsilon = spec.epsilon;
  d.seed = spec.seed;
  std::vector<std::vector<AgentId>> senders(n);
  for (int i = 0; i < n; ++i) {
    std::vector<AgentId> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    for (int a = 0; a < per; ++a) {
      std::swap(others[a], others[a + rng.Below(others.size() - a)]);
    }
    senders[i].assign(others.begin(), others.begin() + per);
    std::sort(senders[i].begin(), senders[i].end());
    for (AgentId j : senders[i]) d.allowed.emplace_back(i, j);
  }

  if (spec.model == RandomModel::kSymmetric) {
    SymmetricWeightedModel model;
    model.sizes.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      model.concave.push_back(ConcaveSpec::Power(0.3 + 0.7 * rng.Uniform()));
      for (AgentId j : senders[i]) model.sizes[i][j] = 0.1 + 0.9 * rng.Uniform();
    }
    d.utility.payload = std::move(model);
    d.sharing.kind = SharingRuleSpec::Kind::kProportional;
    d.sharing.weight_rule = SharingRuleSpec::WeightRule::kSize;
  } else {
    // Weighted coverage is monotone and submodular; materialize it as a table.
    ExplicitTableModel model;
    for (int i = 0; i < n; ++i) {
      std::vector<double> weight(spec.elements);
      for (double& w : weight) w = rng.Uniform();
      std::vector<std::uint64_t> covers(per, 0);
      for (auto& c : covers) {
        for (int e = 0; e < spec.elements; ++e) {
          if (rng.Uniform() < 0.4) c |= std::uint64_t{1} << e;
        }
      }
      ExplicitTableModel::AgentTable t{i, senders[i], std::vector<double>(std::size_t{1} << per)};
      for (std::size_t mask = 1; mask < t.values.size(); ++mask) {
        std::uint64_t hit = 0;
        for (int b = 0; b < per; ++b) {
          if (mask & (std::size_t{1} << b)) hit |= covers[b];
        }
        for (int e = 0; e < spec.elements; ++e) {
          if (hit & (std::uint64_t{1} << e)) t.values[mask] += weight[e];
        }
      }
      model.tables.push_back(std::move(t));
    }
    d.utility.payload = std::move(model);
    d.sharing.kind = SharingRuleSpec::Kind::kShapleyExact;
  }
  Instance raw(std::move(d));
  if (MaxFullUtility(raw) <= 0.0) return raw;
  return NormalizeInstance(raw).first;
}

RandomModel ParseRandomModel(const std::string& name) {
  if (name == "symmetric") return RandomModel::kSymmetric;
  if (name == "table" || name == "coverage") return RandomModel::kCoverageTable;
  throw std::invalid_argument("unknown random model '" + name + "'");
}

std::vector<std::vector<int>> Graph::Adjacency() const {
  std::vector<std::vector<int>> adj(nodes);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

Graph ParseEdgeListCsv(std::istream& in) {
  std::map<long long, int> ids;
  std::set<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  bool seen_data = false;
  auto id_of = [&](long long raw) {
    return ids.emplace(raw, static_cast<int>(ids.size())).first->second;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::size_t comma = line.find(',');
    long long a = 0, b = 0;
    const bool ok = comma != std::string::npos &&
                    ParseId(std::string_view(line).substr(0, comma), &a) &&
                    ParseId(std::string_view(line).substr(comma + 1), &b);
    if (!ok) {
      if (!seen_data) {
        seen_data = true;  // header
        continue;
      }
      throw std::invalid_argument("bad edge on line " + std::to_string(line_no));
    }
    seen_data = true;
    if (a == b) continue;
    const int u = id_of(a), v = id_of(b);
    edges.emplace(std::min(u, v), std::max(u, v));
  }
  Graph g;
  g.nodes = static_cast<int>(ids.size());
  g.edges.assign(edges.begin(), edges.end());
  if (g.edges.empty()) throw std::invalid_argument("graph has no edges");
  return g;
}

Graph LoadEdgeListCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file " + path);
  return ParseEdgeListCsv(in);
}

Graph GridGraph(int w, int h, std::uint64_t seed) {
  if (w < 2 || h < 2) throw std::invalid_argument("grid needs at least 2 x 2 nodes");
  KeyedRng rng(Mix64(seed) ^ 0x67726964ULL);
  std::set<std::pair<int, int>> edges;
  auto id = [w](int x, int y) { return y * w + x; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) edges.emplace(id(x, y), id(x + 1, y));
      if (y + 1 < h) edges.emplace(id(x, y), id(x, y + 1));
      if (x + 1 < w && y + 1 < h && rng.Below(2) == 0) {
        if (rng.Below(2) == 0) {
          edges.emplace(id(x, y), id(x + 1, y + 1));
        } else {
          edges.emplace(id(x + 1, y), id(x, y + 1));
        }
      }
    }
  }
  Graph g;
  g.nodes = w * h;
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

CorrelationMode ParseCorrelationMode(const std::string& name) {
  if (name == "none") return CorrelationMode::kNone;
  if (name == "random") return CorrelationMode::kRandom;
  if (name == "local") return CorrelationMode::kLocal;
  throw std::invalid_argument("unknown correlation mode '" + name + "'");
}

std::string CorrelationModeName(CorrelationMode mode) {
  switch (mode) {
    case CorrelationMode::kNone: return "none";
    case CorrelationMode::kRandom: return "random";
    case CorrelationMode::kLocal: return "local";
  }
  return "none";
}

RoadInstance GenRoad(const Graph& graph, const RoadSpec& spec) {
  if (spec.n_agents < 1 || spec.radius < 1) throw std::invalid_argument("bad road spec");
  if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (graph.nodes < 1) throw std::invalid_argument("graph is empty");
  KeyedRng rng(Mix64(spec.seed) ^ 0x726f6164ULL);

  // Ball of the requested radius around a random centre, relabelled.
  const std::vector<std::vector<int>> full = graph.Adjacency();
  const int centre = static_cast<int>(rng.Below(graph.nodes));
  const std::vector<int> depth = Bfs(full, centre, nullptr);
  std::vector<int> local(graph.nodes, -1);
  Graph ball;
  for (int v = 0; v < graph.nodes; ++v) {
    if (depth[v] >= 0 && depth[v] <= spec.radius) local[v] = ball.nodes++;
  }
  for (const auto& [a, b] : graph.edges) {
    if (local[a] >= 0 && local[b] >= 0) {
      ball.edges.emplace_back(std::min(local[a], local[b]), std::max(local[a], local[b]));
    }
  }
  std::sort(ball.edges.begin(), ball.edges.end());
  if (ball.edges.empty()) throw std::invalid_argument("sampled neighborhood has no edges");
  const std::vector<std::vector<int>> adj = ball.Adjacency();
  std::map<std::pair<int, int>, int> edge_id;
  for (int e = 0; e < static_cast<int>(ball.edges.size()); ++e) edge_id[ball.edges[e]] = e;
  const int num_edges = static_cast<int>(ball.edges.size());

  // Paths: random start, length uniform in [min, BFS depth], random endpoint
  // on that layer, BFS-tree shortest path.
  RoadInstance out{Instance(InstanceData{1, {}, 0.01, 0, {}, {}}), 1.0, 0.0, ball, {}};
  PathVarianceModel model;
  for (int i = 0; i < spec.n_agents; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPathRetries && !placed; ++attempt) {
      const int u = static_cast<int>(rng.Below(ball.nodes));
      std::vector<int> parent;
      const std::vector<int> d = Bfs(adj, u, &parent);
      const int top = *std::max_element(d.begin(), d.end());
      if (top < spec.min_path_length) continue;
      const int t = spec.min_path_length + static_cast<int>(rng.Below(top - spec.min_path_length + 1));
      std::vector<int> layer;
      for (int v = 0; v < ball.nodes; ++v) {
        if (d[v] == t) layer.push_back(v);
      }
      int v = layer[rng.Below(layer.size())];
      std::vector<int> nodes{v};
      std::vector<int> edges;
      while (v != u) {
        const int p = parent[v];
        edges.push_back(edge_id.at({std::min(p, v), std::max(p, v)}));
        nodes.push_back(p);
        v = p;
      }
      std::reverse(nodes.begin(), nodes.end());
      std::reverse(edges.begin(), edges.end());
      out.node_paths.push_back(std::move(nodes));
      model.paths.push_back(std::move(edges));
      placed = true;
    }
    if (!placed) {
      throw std::invalid_argument("neighborhood too shallow for paths of length " +
                                  std::to_string(spec.min_path_length));
    }
    model.samples.push_back(2 + static_cast<int>(rng.Below(8)));
  }

  // Correlation classes.
  UnionFind uf(num_edges);
  if (spec.correlation == CorrelationMode::kRandom) {
    const int pairs = static_cast<int>(std::floor(spec.rho * num_edges));
    for (int p = 0; p < pairs && num_edges > 1; ++p) {
      const int a = static_cast<int>(rng.Below(num_edges));
      int b = static_cast<int>(rng.Below(num_edges - 1));
      if (b >= a) ++b;
      uf.Join(a, b);
    }
  } else if (spec.correlation == CorrelationMode::kLocal) {
    std::vector<int> order(ball.nodes);
    std::iota(order.begin(), order.end(), 0);
    const int picks = static_cast<int>(std::floor(spec.rho * ball.nodes));
    for (int a = 0; a < picks; ++a) std::swap(order[a], order[a + rng.Below(ball.nodes - a)]);
    for (int a = 0; a < picks; ++a) {
      const int v = order[a];
      int first = -1;
      for (int u : adj[v]) {
        const int e = edge_id.at({std::min(u, v), std::max(u, v)});
        if (first < 0) first = e; else uf.Join(first, e);
      }
    }
  }
  std::map<int, int> class_of_root;
  std::vector<double> class_variance;
  model.edge_class.resize(num_edges);
  for (int e = 0; e < num_edges; ++e) {
    const auto [it, fresh] =
        class_of_root.emplace(uf.Find(e), static_cast<int>(class_of_root.size()));
    if (fresh) class_variance.push_back(rng.Uniform());
    model.edge_class[e] = it->second;
  }
  for (int e = 0; e < num_edges; ++e) model.edge_variance.push_back(class_variance[model.edge_class[e]]);

  // j may send to i when j's path touches a class on i's path.
  InstanceData d;
  d.n = spec.n_agents;
  d.epsilon = spec.epsilon;
  d.seed = spec.seed;
  std::vector<std::set<int>> classes(spec.n_agents);
  for (int i = 0; i < spec.n_agents; ++i) {
    for (int e : model.paths[i]) classes[i].insert(model.edge_class[e]);
  }
  for (int i = 0; i < spec.n_agents; ++i) {
    for (int j = 0; j < spec.n_agents; ++j) {
      if (i == j) continue;
      const bool overlap = std::any_of(classes[j].begin(), classes[j].end(),
                                       [&](int c) { return classes[i].count(c) > 0; });
      if (overlap) d.allowed.emplace_back(i, j);
    }
  }
  d.utility.payload = std::move(model);
  d.sharing.kind = SharingRuleSpec::Kind::kShapleySampled;
  d.sharing.permutations = spec.permutations;
  d.sharing.seed = Mix64(spec.seed ^ 0x73686170ULL);
  Instance raw(std::move(d));
  for (int i = 0; i < raw.n(); ++i) out.baseline_variance += raw.BaselineVariance(i);
  if (MaxFullUtility(raw) > 0.0) {
    auto [normalized, scale] = NormalizeInstance(raw);
    out.instance = std::move(normalized);
    out.scale = scale;
  } else {
    out.instance = std::move(raw);
  }
  return out;
}

}  // namespace dexchange
