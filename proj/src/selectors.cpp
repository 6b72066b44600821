#include "cim/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>

#include "cim/errors.hpp"

namespace cim {

// ---------------------------------------------------------------------------
// Gain oracles

ExactOracle::ExactOracle(const Graph& g, Model model, OracleBudget budget)
    : g_(&g), model_(model), budget_(budget) {}

double ExactOracle::spread(std::span<const NodeId> seeds) {
  std::vector<NodeId> key(seeds.begin(), seeds.end());
  std::sort(key.begin(), key.end());
  key.erase(std::unique(key.begin(), key.end()), key.end());
  auto it = memo_.find(key);
  if (it == memo_.end()) it = memo_.emplace(key, exact_spread(*g_, model_, key, budget_)).first;
  return it->second;
}

double ExactOracle::gain(NodeId v) {
  if (std::binary_search(committed_.begin(), committed_.end(), v)) return 0.0;
  std::vector<NodeId> with(committed_);
  with.insert(std::upper_bound(with.begin(), with.end(), v), v);
  constexpr double kGrid = 0x1.0p40;
  const double g = std::round((spread(with) - base_) * kGrid) / kGrid;
  return std::max(0.0, g);
}

void ExactOracle::commit(NodeId v) {
  auto it = std::lower_bound(committed_.begin(), committed_.end(), v);
  if (it != committed_.end() && *it == v) return;
  committed_.insert(it, v);
  base_ = spread(committed_);
}

void ExactOracle::reset() {
  committed_.clear();
  base_ = 0.0;
}

MonteCarloOracle::MonteCarloOracle(const Graph& g, Model model, std::uint64_t trials,
                                   std::uint64_t seed)
    : worlds_(g, model, trials, seed), n_(g.num_nodes()), stamp_(g.num_nodes(), 0) {
  if (trials < 1) throw ValidationError("trial count must be positive");
  constexpr std::uint64_t kMaxFlags = std::uint64_t{1} << 32;
  if (trials * static_cast<std::uint64_t>(n_) > kMaxFlags)
    throw BudgetError("Monte-Carlo oracle needs trials * nodes <= 2^32");
  active_.assign(trials * n_, 0);
  queue_.reserve(n_);
}

std::uint64_t MonteCarloOracle::spread_from(NodeId v, bool mark) {
  const Graph& g = worlds_.graph();
  std::uint64_t total = 0;
  for (std::uint64_t w = 0; w < worlds_.count(); ++w) {
    std::uint8_t* active = active_.data() + w * n_;
    if (active[v]) continue;
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    queue_.clear();
    queue_.push_back(v);
    stamp_[v] = epoch_;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const NodeId u = queue_[head];
      auto targets = g.out_neighbors(u);
      const std::size_t base = g.out_edge_begin(u);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const NodeId t = targets[i];
        if (active[t] || stamp_[t] == epoch_) continue;
        if (worlds_.edge_live(w, base + i)) {
          stamp_[t] = epoch_;
          queue_.push_back(t);
        }
      }
    }
    total += queue_.size();
    if (mark)
      for (NodeId u : queue_) active[u] = 1;
  }
  return total;
}

double MonteCarloOracle::gain(NodeId v) {
  return static_cast<double>(spread_from(v, false)) / static_cast<double>(worlds_.count());
}

void MonteCarloOracle::commit(NodeId v) { spread_from(v, true); }

void MonteCarloOracle::reset() { std::fill(active_.begin(), active_.end(), 0); }

// ---------------------------------------------------------------------------
// Greedy selection

namespace {

struct Entry {
  double gain;
  std::uint32_t ap;
  NodeId node;
  std::uint64_t stamp;
};

/// Max-heap order: higher gain, then lower AP index, then lower node id.
struct EntryLess {
  bool operator()(const Entry& a, const Entry& b) const noexcept {
    if (a.gain != b.gain) return a.gain < b.gain;
    if (a.ap != b.ap) return a.ap > b.ap;
    return a.node > b.node;
  }
};

bool before(const Entry& a, const Entry& b) { return EntryLess{}(b, a); }

using LazyQueue = std::priority_queue<Entry, std::vector<Entry>, EntryLess>;

/// Tracks distinct seeds so the oracle is only committed once per node; the
/// commit counter doubles as the CELF round stamp.
struct SelectionState {
  explicit SelectionState(const Instance& inst, GainOracle& oracle)
      : oracle(oracle), taken(inst.pp_graph().num_nodes(), 0), result{} {
    result.assignment = SeedAssignment(inst.num_aps());
  }

  void select(std::size_t ap, NodeId v, double gain) {
    result.assignment.per_ap[ap].push_back(v);
    result.trace.push_back({ap, v, gain});
    if (!taken[v]) {
      taken[v] = 1;
      oracle.commit(v);
      ++round;
    }
  }

  double evaluate(NodeId v) {
    ++result.evaluations;
    return oracle.gain(v);
  }

  GainOracle& oracle;
  std::vector<char> taken;
  std::uint64_t round = 0;
  GreedyResult result;
};

}  // namespace

GreedyResult mg_greedy(const Instance& inst, GainOracle& oracle, const GreedyOptions& opts) {
  oracle.reset();
  SelectionState st(inst, oracle);
  const std::size_t d = inst.num_aps();
  const std::size_t k = inst.k();
  std::vector<std::size_t> count(d, 0);

  if (!opts.lazy) {
    // pool[a] = candidates of AP a not yet selected by a
    std::vector<std::vector<NodeId>> pool(d);
    for (std::size_t a = 0; a < d; ++a)
      if (k > 0) pool[a].assign(inst.candidates(a).begin(), inst.candidates(a).end());
    while (true) {
      if (opts.checkpoint) opts.checkpoint();
      std::optional<Entry> best;
      for (std::size_t a = 0; a < d; ++a)
        for (NodeId v : pool[a]) {
          const Entry e{st.evaluate(v), static_cast<std::uint32_t>(a), v, st.round};
          if (!best || before(e, *best)) best = e;
        }
      if (!best) break;
      auto& p = pool[best->ap];
      p.erase(std::find(p.begin(), p.end(), best->node));
      st.select(best->ap, best->node, best->gain);
      if (++count[best->ap] >= k) p.clear();
    }
    return std::move(st.result);
  }

  LazyQueue heap;
  if (k > 0)
    for (std::size_t a = 0; a < d; ++a)
      for (NodeId v : inst.candidates(a))
        heap.push({st.evaluate(v), static_cast<std::uint32_t>(a), v, st.round});
  while (!heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    if (count[top.ap] >= k) continue;
    if (top.stamp != st.round) {
      top.gain = st.evaluate(top.node);
      top.stamp = st.round;
      heap.push(top);
      continue;
    }
    if (opts.checkpoint) opts.checkpoint();
    st.select(top.ap, top.node, top.gain);
    ++count[top.ap];
  }
  return std::move(st.result);
}

GreedyResult rr_greedy(const Instance& inst, GainOracle& oracle, const GreedyOptions& opts) {
  oracle.reset();
  SelectionState st(inst, oracle);
  const std::size_t d = inst.num_aps();
  const std::size_t k = inst.k();

  std::vector<std::size_t> live;
  for (std::size_t a = 0; a < d; ++a)
    if (k > 0 && !inst.candidates(a).empty()) live.push_back(a);

  std::vector<LazyQueue> heaps(d);
  std::vector<std::vector<NodeId>> pool(d);
  for (std::size_t a : live) {
    if (opts.lazy) {
      for (NodeId v : inst.candidates(a))
        heaps[a].push({st.evaluate(v), static_cast<std::uint32_t>(a), v, st.round});
    } else {
      pool[a].assign(inst.candidates(a).begin(), inst.candidates(a).end());
    }
  }
  std::vector<std::size_t> count(d, 0);

  while (!live.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t a : live) {
      if (opts.checkpoint) opts.checkpoint();
      std::size_t remaining = 0;
      if (opts.lazy) {
        auto& heap = heaps[a];
        while (true) {
          Entry top = heap.top();
          heap.pop();
          if (top.stamp != st.round) {
            top.gain = st.evaluate(top.node);
            top.stamp = st.round;
            heap.push(top);
            continue;
          }
          st.select(a, top.node, top.gain);
          break;
        }
        remaining = heap.size();
      } else {
        auto& p = pool[a];
        std::optional<Entry> best;
        for (NodeId v : p) {
          const Entry e{st.evaluate(v), static_cast<std::uint32_t>(a), v, st.round};
          if (!best || before(e, *best)) best = e;
        }
        p.erase(std::find(p.begin(), p.end(), best->node));
        st.select(a, best->node, best->gain);
        remaining = p.size();
      }
      if (++count[a] < k && remaining > 0) next.push_back(a);
    }
    live = std::move(next);
  }
  return std::move(st.result);
}

// ---------------------------------------------------------------------------
// Local baselines

std::vector<double> pagerank(const Graph& g, const PageRankParams& params) {
  const NodeId n = g.num_nodes();
  if (n == 0) return {};
  const double inv_n = 1.0 / n;
  std::vector<double> rank(n, inv_n), next(n);
  for (int it = 0; it < params.max_iterations; ++it) {
    // Reversed edges: v distributes its rank over its in-neighbors.
    double dangling = 0.0;
    for (NodeId v = 0; v < n; ++v)
      if (g.in_degree(v) == 0) dangling += rank[v];
    const double teleport = (1.0 - params.damping) * inv_n + params.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), teleport);
    for (NodeId v = 0; v < n; ++v) {
      const auto sources = g.in_neighbors(v);
      if (sources.empty()) continue;
      const double share = params.damping * rank[v] / static_cast<double>(sources.size());
      for (NodeId u : sources) next[u] += share;
    }
    double delta = 0.0;
    for (NodeId v = 0; v < n; ++v) delta += std::abs(next[v] - rank[v]);
    rank.swap(next);
    if (delta < params.tolerance) break;
  }
  return rank;
}

LocalScore parse_local_score(const std::string& name) {
  if (name == "degree") return LocalScore::degree;
  if (name == "pagerank") return LocalScore::pagerank;
  if (name == "local-rr" || name == "local-rr-greedy") return LocalScore::local_rr_greedy;
  throw ValidationError("unknown local score '" + name + "'");
}

SeedAssignment local_topk(const Instance& inst, LocalScore score, const LocalOptions& opts) {
  const std::size_t d = inst.num_aps();
  const std::size_t k = inst.k();
  SeedAssignment out(d);

  if (score == LocalScore::local_rr_greedy) {
    if (!opts.rr) throw std::invalid_argument("local-rr-greedy needs an RR collection");
    RRCollection& coll = *opts.rr;
    for (std::size_t a = 0; a < d; ++a) {
      coll.reset_marginals();
      std::vector<NodeId> pool(inst.candidates(a).begin(), inst.candidates(a).end());
      while (out.per_ap[a].size() < k && !pool.empty()) {
        auto best = pool.begin();
        for (auto it = pool.begin(); it != pool.end(); ++it)
          if (coll.peek_marginal(*it) > coll.peek_marginal(*best)) best = it;
        coll.commit(*best);
        out.per_ap[a].push_back(*best);
        pool.erase(best);
      }
    }
    coll.reset_marginals();
    return out;
  }

  const Graph& g = opts.on_full_graph ? inst.graph() : inst.pp_graph();
  auto node_of = [&](NodeId v) { return opts.on_full_graph ? inst.pp_to_graph(v) : v; };
  std::vector<double> pr;
  if (score == LocalScore::pagerank) pr = pagerank(g, opts.pagerank);
  auto value = [&](NodeId v) {
    return score == LocalScore::degree ? static_cast<double>(g.out_degree(node_of(v)))
                                       : pr[node_of(v)];
  };

  for (std::size_t a = 0; a < d; ++a) {
    std::vector<NodeId> ranked(inst.candidates(a).begin(), inst.candidates(a).end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](NodeId x, NodeId y) { return value(x) > value(y); });
    ranked.resize(std::min(k, ranked.size()));
    out.per_ap[a] = std::move(ranked);
  }
  return out;
}

}  // namespace cim
