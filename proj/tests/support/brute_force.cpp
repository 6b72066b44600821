#include "support/brute_force.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace cimtest {

namespace {

int reach(int n, const std::vector<std::vector<int>>& adj, const std::vector<int>& seeds) {
  std::vector<char> seen(n, 0);
  std::vector<int> stack;
  for (int s : seeds)
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  int count = static_cast<int>(stack.size());
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count;
}

}  // namespace

double brute_ic(const TinyGraph& g, const std::vector<int>& seeds) {
  const std::size_t m = g.edges.size();
  if (m > 24) throw std::invalid_argument("too many edges for brute force");
  double total = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double prob = 1;
    std::vector<std::vector<int>> adj(g.n);
    for (std::size_t i = 0; i < m && prob > 0; ++i) {
      const auto& [u, v, p] = g.edges[i];
      if (mask >> i & 1) {
        prob *= p;
        adj[u].push_back(v);
      } else {
        prob *= 1 - p;
      }
    }
    if (prob > 0) total += prob * reach(g.n, adj, seeds);
  }
  return total;
}

double brute_lt(const TinyGraph& g, const std::vector<int>& seeds) {
  std::vector<std::vector<int>> in_edges(g.n);
  for (std::size_t i = 0; i < g.edges.size(); ++i) in_edges[std::get<1>(g.edges[i])].push_back(i);
  std::vector<int> choice(g.n, -1);
  double total = 0;
  std::function<void(int, double)> rec = [&](int v, double prob) {
    if (prob == 0) return;
    if (v == g.n) {
      std::vector<std::vector<int>> adj(g.n);
      for (int w = 0; w < g.n; ++w)
        if (choice[w] >= 0) adj[std::get<0>(g.edges[choice[w]])].push_back(w);
      total += prob * reach(g.n, adj, seeds);
      return;
    }
    double rest = 1;
    for (int e : in_edges[v]) {
      rest -= std::get<2>(g.edges[e]);
      choice[v] = e;
      rec(v + 1, prob * std::get<2>(g.edges[e]));
    }
    choice[v] = -1;
    rec(v + 1, prob * std::max(0.0, rest));
  };
  rec(0, 1.0);
  return total;
}

double brute_spread(const TinyGraph& g, bool lt, const std::vector<int>& seeds) {
  return lt ? brute_lt(g, seeds) : brute_ic(g, seeds);
}

BruteOptimum brute_optimum(const TinyGraph& p, const std::vector<std::vector<int>>& candidates,
                           int k, bool lt) {
  std::map<std::set<int>, double> memo;
  BruteOptimum best;
  best.value = -1;
  std::vector<std::set<int>> chosen(candidates.size());
  std::function<void(std::size_t)> per_ap = [&](std::size_t a) {
    if (a == candidates.size()) {
      std::set<int> all;
      for (const auto& s : chosen) all.insert(s.begin(), s.end());
      auto it = memo.find(all);
      double value = it != memo.end()
                         ? it->second
                         : memo[all] = brute_spread(p, lt, std::vector<int>(all.begin(), all.end()));
      std::vector<int> seeds(all.begin(), all.end());
      if (value > best.value + 1e-9 || (value > best.value - 1e-9 && seeds < best.seeds)) {
        best.value = std::max(best.value, value);
        best.seeds = seeds;
      }
      return;
    }
    const auto& c = candidates[a];
    const int m = static_cast<int>(c.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      if (__builtin_popcount(mask) > k) continue;
      chosen[a].clear();
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1) chosen[a].insert(c[i]);
      per_ap(a + 1);
    }
    chosen[a].clear();
  };
  per_ap(0);
  return best;
}

std::uint64_t brute_max_coverage(const std::vector<std::vector<int>>& sets,
                                 const std::vector<std::vector<int>>& candidates, int k) {
  std::uint64_t best = 0;
  std::vector<int> picked;
  std::function<void(std::size_t)> per_ap = [&](std::size_t a) {
    if (a == candidates.size()) {
      std::uint64_t cov = 0;
      for (const auto& s : sets) {
        bool hit = false;
        for (int v : s)
          if (std::find(picked.begin(), picked.end(), v) != picked.end()) hit = true;
        cov += hit;
      }
      best = std::max(best, cov);
      return;
    }
    const auto& c = candidates[a];
    const int m = static_cast<int>(c.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      if (__builtin_popcount(mask) > k) continue;
      const auto before = picked.size();
      for (int i = 0; i < m; ++i)
        if (mask >> i & 1) picked.push_back(c[i]);
      per_ap(a + 1);
      picked.resize(before);
    }
  };
  per_ap(0);
  return best;
}

}  // namespace cimtest
