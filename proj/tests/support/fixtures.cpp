#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace cimtest {

std::shared_ptr<const cim::Graph> make_graph(cim::NodeId n, std::vector<cim::Edge> edges) {
  return std::make_shared<const cim::Graph>(n, std::move(edges));
}

cim::Instance t1(std::size_t k) {
  auto g = make_graph(5, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 0.5}, {3, 4, 0.5}});
  const std::vector<cim::NodeId> aps{0};
  return cim::build_instance(g, aps, k);
}

cim::Instance t2(std::size_t k) {
  auto g = make_graph(7, {{0, 2, 1.0},
                          {0, 3, 1.0},
                          {1, 3, 1.0},
                          {1, 4, 1.0},
                          {2, 5, 1.0},
                          {3, 5, 1.0},
                          {3, 6, 1.0},
                          {4, 6, 1.0}});
  const std::vector<cim::NodeId> aps{0, 1};
  return cim::build_instance(g, aps, k);
}

TinyGraph to_tiny(const cim::Graph& g) {
  TinyGraph t;
  t.n = static_cast<int>(g.num_nodes());
  for (const auto& e : g.edges())
    t.edges.emplace_back(static_cast<int>(e.src), static_cast<int>(e.dst), e.value);
  return t;
}

std::vector<std::vector<int>> tiny_candidates(const cim::Instance& inst) {
  std::vector<std::vector<int>> out(inst.num_aps());
  for (std::size_t a = 0; a < inst.num_aps(); ++a)
    for (auto v : inst.candidates(a)) out[a].push_back(static_cast<int>(v));
  return out;
}

cim::Instance random_instance(std::mt19937_64& gen, const RandomSpec& spec) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  const int d = pick(1, spec.max_aps);
  const int np = pick(3, spec.max_pp);
  const int n = d + np;
  std::vector<cim::Edge> edges;
  for (int a = 0; a < d; ++a) {
    std::set<int> targets{pick(d, n - 1)};
    const int extra = pick(0, std::min(3, np - 1));
    for (int i = 0; i < extra; ++i) targets.insert(pick(d, n - 1));
    for (int v : targets) edges.push_back({cim::NodeId(a), cim::NodeId(v), 1.0});
  }
  static const double grid[] = {0.25, 0.5, 0.75};
  const int pp_edges = pick(np - 1, 2 * np);
  int fractional = 0;
  std::set<std::pair<int, int>> used;
  std::vector<cim::Edge> pp;
  for (int i = 0; i < pp_edges; ++i) {
    const int u = pick(d, n - 1), v = pick(d, n - 1);
    if (u == v || !used.insert({u, v}).second) continue;
    double p = 1.0;
    if (fractional < spec.max_prob_edges && pick(0, 3) > 0) {
      p = grid[pick(0, 2)];
      ++fractional;
    }
    pp.push_back({cim::NodeId(u), cim::NodeId(v), p});
  }
  if (spec.lt) {
    std::vector<double> sum(n, 0.0);
    for (const auto& e : pp) sum[e.dst] += e.value;
    for (auto& e : pp)
      if (sum[e.dst] > 1.0) e.value = std::floor(e.value / sum[e.dst] * 0.9 * 64) / 64;
  }
  edges.insert(edges.end(), pp.begin(), pp.end());
  std::vector<cim::NodeId> aps(d);
  for (int a = 0; a < d; ++a) aps[a] = cim::NodeId(a);
  return cim::build_instance(make_graph(cim::NodeId(n), std::move(edges)), aps,
                             static_cast<std::size_t>(pick(1, spec.max_k)));
}

std::shared_ptr<const cim::Graph> random_wc_graph(cim::NodeId n, std::size_t avg_out,
                                                  std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // Directed Chung-Lu: one Pareto weight (exponent 2.5) per node drives both
  // its in- and out-degree, so hubs are hubs in both directions.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> weight(n);
  for (auto& w : weight) w = std::pow(1.0 - unit(gen), -1.0 / 1.5);
  std::discrete_distribution<cim::NodeId> pick(weight.begin(), weight.end());
  std::set<std::pair<cim::NodeId, cim::NodeId>> used;
  const std::size_t m = static_cast<std::size_t>(n) * avg_out;
  for (std::size_t i = 0; i < m; ++i) {
    const cim::NodeId u = pick(gen), v = pick(gen);
    if (u != v) used.insert({u, v});
  }
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& [u, v] : used) ++indeg[v];
  std::vector<cim::Edge> edges;
  edges.reserve(used.size());
  for (const auto& [u, v] : used) edges.push_back({u, v, 1.0 / double(indeg[v])});
  return make_graph(n, std::move(edges));
}

}  // namespace cimtest
