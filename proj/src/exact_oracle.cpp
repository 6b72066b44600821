#include "cim/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "cim/errors.hpp"

namespace cim {

namespace {

/// Nodes reachable from seeds through edges with positive value.
std::vector<char> positive_region(const Graph& g, std::span<const NodeId> seeds) {
  std::vector<char> in(g.num_nodes(), 0);
  std::vector<NodeId> stack;
  for (NodeId s : seeds)
    if (!in[s]) {
      in[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    auto targets = g.out_neighbors(u);
    auto values = g.out_values(u);
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (values[i] > 0.0 && !in[targets[i]]) {
        in[targets[i]] = 1;
        stack.push_back(targets[i]);
      }
  }
  return in;
}

double exact_spread_ic(const Graph& g, std::span<const NodeId> seeds, const OracleBudget& budget) {
  const auto region = positive_region(g, seeds);
  // Forward edge index -> bit position, or -1 for certain edges.
  std::vector<int> bit(g.num_edges(), -1);
  std::vector<double> probs;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (!region[u]) continue;
    auto values = g.out_values(u);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > 0.0 && values[i] < 1.0) {
        bit[g.out_edge_begin(u) + i] = static_cast<int>(probs.size());
        probs.push_back(values[i]);
      }
  }
  if (probs.size() > budget.max_probabilistic_edges || probs.size() >= 63)
    throw BudgetError("exact IC spread needs " + std::to_string(probs.size()) +
                      " probabilistic edges, budget is " +
                      std::to_string(budget.max_probabilistic_edges));

  const std::uint64_t worlds = std::uint64_t{1} << probs.size();
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<NodeId> queue;
  long double total = 0.0L;
  for (std::uint64_t mask = 0; mask < worlds; ++mask) {
    long double pr = 1.0L;
    for (std::size_t b = 0; b < probs.size(); ++b)
      pr *= (mask >> b) & 1 ? probs[b] : 1.0 - probs[b];
    queue.clear();
    for (NodeId s : seeds)
      if (!seen[s]) {
        seen[s] = 1;
        queue.push_back(s);
      }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId u = queue[head];
      auto targets = g.out_neighbors(u);
      auto values = g.out_values(u);
      const std::size_t base = g.out_edge_begin(u);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (seen[targets[i]]) continue;
        const int b = bit[base + i];
        const bool live = b < 0 ? values[i] >= 1.0 : ((mask >> b) & 1) != 0;
        if (live) {
          seen[targets[i]] = 1;
          queue.push_back(targets[i]);
        }
      }
    }
    total += pr * static_cast<long double>(queue.size());
    for (NodeId v : queue) seen[v] = 0;
  }
  return static_cast<double>(total);
}

double exact_spread_lt(const Graph& g, std::span<const NodeId> seeds, const OracleBudget& budget) {
  g.require_lt();
  const auto region = positive_region(g, seeds);
  std::vector<char> is_seed(g.num_nodes(), 0);
  for (NodeId s : seeds) is_seed[s] = 1;

  // Each non-seed region node picks one in-edge from inside the region, or none.
  struct Choice {
    NodeId node;
    std::vector<NodeId> parents;  // kNoNode = none
    std::vector<double> probs;
  };
  std::vector<Choice> choices;
  std::vector<NodeId> fixed_parent(g.num_nodes(), kNoNode);
  double log2_worlds = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (!region[v] || is_seed[v]) continue;
    Choice c{v, {}, {}};
    double none = 1.0;
    auto sources = g.in_neighbors(v);
    auto weights = g.in_values(v);
    for (std::size_t j = 0; j < sources.size(); ++j) {
      if (!region[sources[j]] || weights[j] <= 0.0) continue;
      c.parents.push_back(sources[j]);
      c.probs.push_back(weights[j]);
      none -= weights[j];
    }
    if (none > 1e-15) {
      c.parents.push_back(kNoNode);
      c.probs.push_back(none);
    }
    if (c.parents.size() == 1) {
      fixed_parent[v] = c.parents.front();
      continue;
    }
    log2_worlds += std::log2(static_cast<double>(c.parents.size()));
    choices.push_back(std::move(c));
  }
  if (log2_worlds > static_cast<double>(budget.max_probabilistic_edges) + 1e-9)
    throw BudgetError("exact LT spread needs 2^" + std::to_string(log2_worlds) +
                      " worlds, budget is 2^" + std::to_string(budget.max_probabilistic_edges));

  std::vector<NodeId> parent = fixed_parent;
  std::vector<std::size_t> digit(choices.size(), 0);
  // 0 unknown, 1 visiting, 2 active, 3 inactive
  std::vector<char> state(g.num_nodes(), 0);
  std::vector<NodeId> path;
  long double total = 0.0L;
  while (true) {
    long double pr = 1.0L;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      parent[choices[i].node] = choices[i].parents[digit[i]];
      pr *= choices[i].probs[digit[i]];
    }
    std::size_t active = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (!region[v]) continue;
      if (state[v] == 0) {
        path.clear();
        NodeId cur = v;
        char verdict = 3;
        while (true) {
          if (is_seed[cur]) {
            verdict = 2;
            break;
          }
          if (state[cur] == 2 || state[cur] == 3) {
            verdict = state[cur];
            break;
          }
          if (state[cur] == 1 || parent[cur] == kNoNode) {
            verdict = 3;
            break;
          }
          state[cur] = 1;
          path.push_back(cur);
          cur = parent[cur];
        }
        for (NodeId p : path) state[p] = verdict;
        if (is_seed[v]) state[v] = 2;
      }
      if (state[v] == 2 || is_seed[v]) ++active;
    }
    total += pr * static_cast<long double>(active);
    std::fill(state.begin(), state.end(), 0);

    std::size_t pos = 0;
    while (pos < choices.size() && ++digit[pos] == choices[pos].parents.size()) digit[pos++] = 0;
    if (pos == choices.size()) break;
  }
  return static_cast<double>(total);
}

bool lex_less(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Lexicographic combinations of size r drawn from `items`.
std::vector<std::vector<NodeId>> combinations(std::span<const NodeId> items, std::size_t r) {
  std::vector<std::vector<NodeId>> out;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    std::vector<NodeId> pick(r);
    for (std::size_t i = 0; i < r; ++i) pick[i] = items[idx[i]];
    out.push_back(std::move(pick));
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == items.size() - r + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace

double exact_spread(const Graph& g, Model model, std::span<const NodeId> seeds,
                    const OracleBudget& budget) {
  for (NodeId s : seeds)
    if (s >= g.num_nodes()) throw ValidationError("seed id " + std::to_string(s) + " out of range");
  if (seeds.empty()) return 0.0;
  return model == Model::ic ? exact_spread_ic(g, seeds, budget) : exact_spread_lt(g, seeds, budget);
}

std::uint64_t count_full_assignments(const Instance& inst) {
  std::uint64_t total = 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t a = 0; a < inst.num_aps(); ++a) {
    const std::size_t n = inst.candidates(a).size();
    const std::size_t r = std::min(inst.k(), n);
    // C(n, r) built incrementally; exact while it fits.
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= r; ++i) {
      const auto num = static_cast<unsigned __int128>(c) * (n - r + i);
      if (num / i > kMax) return kMax;
      c = static_cast<std::uint64_t>(num / i);
    }
    if (c && total > kMax / c) return kMax;
    total *= c;
  }
  return total;
}

void for_each_full_assignment(const Instance& inst,
                              const std::function<void(const SeedAssignment&)>& fn) {
  const std::size_t d = inst.num_aps();
  std::vector<std::vector<std::vector<NodeId>>> options(d);
  for (std::size_t a = 0; a < d; ++a)
    options[a] = combinations(inst.candidates(a), std::min(inst.k(), inst.candidates(a).size()));
  std::vector<std::size_t> digit(d, 0);
  SeedAssignment s(d);
  while (true) {
    for (std::size_t a = 0; a < d; ++a) s.per_ap[a] = options[a][digit[a]];
    fn(s);
    std::size_t pos = 0;
    while (pos < d && ++digit[pos] == options[pos].size()) digit[pos++] = 0;
    if (pos == d) break;
  }
}

OptimumResult exact_optimum(const Instance& inst, Model model, const OracleBudget& budget) {
  const std::uint64_t total = count_full_assignments(inst);
  if (total > budget.max_assignments)
    throw BudgetError("exact optimum needs " + std::to_string(total) +
                      " assignments, budget is " + std::to_string(budget.max_assignments));
  OptimumResult best;
  best.spread = -1.0;
  std::map<std::vector<NodeId>, double> memo;
  for_each_full_assignment(inst, [&](const SeedAssignment& s) {
    auto seeds = s.distinct_seeds();
    auto it = memo.find(seeds);
    if (it == memo.end())
      it = memo.emplace(seeds, exact_spread(inst.pp_graph(), model, seeds, budget)).first;
    const double value = it->second;
    const double tol = 1e-12 * std::max(1.0, std::abs(best.spread));
    const bool better = value > best.spread + tol ||
                        (std::abs(value - best.spread) <= tol && lex_less(seeds, best.seeds));
    if (better) {
      best.spread = value;
      best.seeds = std::move(seeds);
      best.assignment = s;
    }
  });
  return best;
}

CurvatureResult curvature_gamma_max(const Instance& inst, Model model, const OracleBudget& budget) {
  CurvatureResult result;
  const auto all = std::vector<NodeId>(inst.candidate_nodes().begin(), inst.candidate_nodes().end());
  if (all.empty()) return result;
  const Graph& p = inst.pp_graph();
  const double whole = exact_spread(p, model, all, budget);

  std::map<NodeId, double> without, single;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < inst.num_aps(); ++a) {
    for (NodeId v : inst.candidates(a)) {
      auto sit = single.find(v);
      if (sit == single.end()) {
        const NodeId one[] = {v};
        sit = single.emplace(v, exact_spread(p, model, one, budget)).first;
      }
      if (sit->second <= 0.0) {
        result.skipped.emplace_back(a, v);
        continue;
      }
      // The node stays covered when another AP also lists it.
      double rest = whole;
      if (inst.ap_friends(v).size() == 1) {
        auto wit = without.find(v);
        if (wit == without.end()) {
          std::vector<NodeId> others;
          for (NodeId c : all)
            if (c != v) others.push_back(c);
          wit = without.emplace(v, exact_spread(p, model, others, budget)).first;
        }
        rest = wit->second;
      }
      min_ratio = std::min(min_ratio, (whole - rest) / sit->second);
    }
  }
  if (std::isinf(min_ratio)) return result;
  result.gamma_max = std::clamp(1.0 - min_ratio, 0.0, 1.0);
  return result;
}

}  // namespace cim
