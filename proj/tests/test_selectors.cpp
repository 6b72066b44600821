#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cim/errors.hpp"
#include "cim/exact_oracle.hpp"
#include "cim/selectors.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace cim;

namespace {

std::vector<std::pair<ExternalId, ExternalId>> external_trace(const Instance& inst,
                                                              const GreedyResult& r) {
  std::vector<std::pair<ExternalId, ExternalId>> out;
  for (const auto& s : r.trace) out.emplace_back(inst.ap_external(s.ap), inst.pp_external(s.node));
  return out;
}

void check_matroid(const Instance& inst, const SeedAssignment& s) {
  REQUIRE(s.per_ap.size() == inst.num_aps());
  CHECK_NOTHROW(check_feasible(inst, s));
}

RRCollection random_collection(std::mt19937_64& gen, NodeId nodes, std::size_t count) {
  std::vector<std::vector<NodeId>> sets(count);
  for (auto& s : sets) {
    std::set<NodeId> m{static_cast<NodeId>(gen() % nodes)};
    const auto extra = gen() % 3;
    for (std::uint64_t i = 0; i < extra; ++i) m.insert(static_cast<NodeId>(gen() % nodes));
    s.assign(m.begin(), m.end());
  }
  return RRCollection::from_sets(nodes, sets);
}

}  // namespace

TEST_CASE("mg_greedy on T2 with the exact oracle") {
  const auto inst = cimtest::t2();
  ExactOracle oracle(inst.pp_graph(), Model::ic);
  const auto r = mg_greedy(inst, oracle);
  const std::vector<std::pair<ExternalId, ExternalId>> expect{{0, 3}, {1, 4}};
  CHECK(external_trace(inst, r) == expect);
  CHECK(r.trace[0].gain == 3.0);
  CHECK(exact_spread(inst.pp_graph(), Model::ic, r.assignment.distinct_seeds()) == 4.0);
}

TEST_CASE("rr_greedy on T2 with the exact oracle") {
  const auto inst = cimtest::t2();
  ExactOracle oracle(inst.pp_graph(), Model::ic);
  const auto r = rr_greedy(inst, oracle);
  const std::vector<std::pair<ExternalId, ExternalId>> expect{{0, 3}, {1, 4}};
  CHECK(external_trace(inst, r) == expect);
  CHECK(r.trace[1].gain == 1.0);
}

TEST_CASE("T1 selections") {
  const auto inst = cimtest::t1();
  ExactOracle oracle(inst.pp_graph(), Model::ic);
  const auto mg = mg_greedy(inst, oracle);
  REQUIRE(mg.trace.size() == 1);
  CHECK(inst.pp_external(mg.trace[0].node) == 1);

  const auto two = cimtest::t1(2);
  ExactOracle o2(two.pp_graph(), Model::ic);
  const auto rr = rr_greedy(two, o2);
  CHECK(rr.assignment.per_ap[0].size() == 2);
  CHECK(exact_spread(two.pp_graph(), Model::ic, rr.assignment.distinct_seeds()) ==
        doctest::Approx(3.5));

  const auto none = cimtest::t1(0);
  ExactOracle o0(none.pp_graph(), Model::ic);
  CHECK(mg_greedy(none, o0).assignment.num_edges() == 0);
  CHECK(rr_greedy(none, o0).assignment.num_edges() == 0);
}

TEST_CASE("zero-gain candidates still fill capacity") {
  const auto inst = cimtest::t2(2);
  ExactOracle oracle(inst.pp_graph(), Model::ic);
  const auto r = rr_greedy(inst, oracle);
  CHECK(r.assignment.num_edges() == 4);
  CHECK(r.assignment.distinct_seeds().size() == 3);
}

TEST_CASE("lazy and eager evaluation select identically") {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = cimtest::random_instance(gen);
    GreedyOptions eager;
    eager.lazy = false;
    {
      ExactOracle a(inst.pp_graph(), Model::ic), b(inst.pp_graph(), Model::ic);
      const auto x = mg_greedy(inst, a), y = mg_greedy(inst, b, eager);
      CHECK(x.assignment == y.assignment);
      CHECK(x.evaluations <= y.evaluations);
      ExactOracle c(inst.pp_graph(), Model::ic), d(inst.pp_graph(), Model::ic);
      CHECK(rr_greedy(inst, c).assignment == rr_greedy(inst, d, eager).assignment);
    }
    {
      RRCollection coll(inst.pp_graph(), Model::ic, gen());
      coll.extend(2000);
      CoverageOracle o(coll);
      const auto x = mg_greedy(inst, o);
      o.reset();
      const auto y = mg_greedy(inst, o, eager);
      CHECK(x.assignment == y.assignment);
      o.reset();
      const auto z = rr_greedy(inst, o);
      o.reset();
      CHECK(z.assignment == rr_greedy(inst, o, eager).assignment);
    }
  }
}

TEST_CASE("single AP: both greedy algorithms coincide") {
  std::mt19937_64 gen(3);
  cimtest::RandomSpec spec;
  spec.max_aps = 1;
  spec.max_k = 3;
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = cimtest::random_instance(gen, spec);
    RRCollection coll(inst.pp_graph(), Model::ic, gen());
    coll.extend(500);
    CoverageOracle o(coll);
    const auto a = mg_greedy(inst, o);
    o.reset();
    const auto b = rr_greedy(inst, o);
    CHECK(a.assignment == b.assignment);
    MonteCarloOracle m1(inst.pp_graph(), Model::ic, 200, 4), m2(inst.pp_graph(), Model::ic, 200, 4);
    CHECK(mg_greedy(inst, m1).assignment == rr_greedy(inst, m2).assignment);
  }
}

TEST_CASE("exact-oracle greedy guarantees") {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = cimtest::random_instance(gen);
    const auto opt = exact_optimum(inst, Model::ic);
    const double gamma = curvature_gamma_max(inst, Model::ic).gamma_max;
    ExactOracle a(inst.pp_graph(), Model::ic), b(inst.pp_graph(), Model::ic);
    const auto mg = mg_greedy(inst, a);
    const auto rr = rr_greedy(inst, b);
    check_matroid(inst, mg.assignment);
    check_matroid(inst, rr.assignment);
    CHECK(exact_spread(inst.pp_graph(), Model::ic, mg.assignment.distinct_seeds()) >=
          0.5 * opt.spread - 1e-9);
    CHECK(exact_spread(inst.pp_graph(), Model::ic, rr.assignment.distinct_seeds()) >=
          opt.spread / (1 + gamma) - 1e-9);
  }
}

TEST_CASE("coverage greedy reaches half the best feasible coverage") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = cimtest::random_instance(gen);
    auto coll = random_collection(gen, inst.pp_graph().num_nodes(), 1 + gen() % 12);
    std::vector<std::vector<int>> sets;
    for (std::size_t i = 0; i < coll.size(); ++i)
      sets.emplace_back(coll.members(i).begin(), coll.members(i).end());
    const auto best =
        cimtest::brute_max_coverage(sets, cimtest::tiny_candidates(inst), static_cast<int>(inst.k()));
    CoverageOracle o(coll);
    const auto r = rr_greedy(inst, o);
    CHECK(2 * coll.coverage(r.assignment.distinct_seeds()) >= best);
  }
}

TEST_CASE("Monte-Carlo oracle gains are submodular and reproducible") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = cimtest::random_instance(gen);
    const Graph& p = inst.pp_graph();
    MonteCarloOracle o(p, Model::ic, 300, 11);
    std::vector<double> before(p.num_nodes());
    for (NodeId v = 0; v < p.num_nodes(); ++v) before[v] = o.gain(v);
    o.commit(0);
    for (NodeId v = 0; v < p.num_nodes(); ++v) {
      CHECK(o.gain(v) >= 0.0);
      CHECK(o.gain(v) <= before[v] + 1e-12);
    }
    o.reset();
    for (NodeId v = 0; v < p.num_nodes(); ++v) CHECK(o.gain(v) == before[v]);
  }
  auto g = cimtest::random_wc_graph(10, 2, 1);
  CHECK_THROWS_AS(MonteCarloOracle(*g, Model::ic, std::uint64_t{1} << 30, 1), BudgetError);
}

TEST_CASE("Monte-Carlo greedy approaches the exact greedy value") {
  const auto inst = cimtest::t1();
  MonteCarloOracle o(inst.pp_graph(), Model::ic, 10000, 5);
  CHECK(o.gain(inst.graph_to_pp(1)) == doctest::Approx(2.5).epsilon(0.03));
  CHECK(o.gain(inst.graph_to_pp(2)) == doctest::Approx(1.75).epsilon(0.03));
}

TEST_CASE("local top-k") {
  const auto t1 = cimtest::t1();
  const auto deg = local_topk(t1, LocalScore::degree);
  REQUIRE(deg.per_ap[0].size() == 1);
  CHECK(t1.pp_external(deg.per_ap[0][0]) == 1);

  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = cimtest::random_instance(gen);
    RRCollection coll(inst.pp_graph(), Model::ic, 1);
    coll.extend(300);
    LocalOptions opts;
    opts.rr = &coll;
    for (LocalScore s : {LocalScore::degree, LocalScore::pagerank, LocalScore::local_rr_greedy}) {
      const auto a = local_topk(inst, s, opts);
      check_matroid(inst, a);
      for (std::size_t u = 0; u < inst.num_aps(); ++u)
        CHECK(a.per_ap[u].size() == std::min(inst.k(), inst.candidates(u).size()));
    }
  }

  // Two APs sharing the top candidate both receive it.
  auto g = cimtest::make_graph(6, {{0, 2, 1.0}, {0, 3, 1.0}, {1, 2, 1.0}, {1, 4, 1.0},
                                   {2, 5, 1.0}});
  const std::vector<NodeId> aps{0, 1};
  const auto inst = build_instance(g, aps, 1);
  const auto a = local_topk(inst, LocalScore::degree);
  CHECK(inst.pp_external(a.per_ap[0][0]) == 2);
  CHECK(inst.pp_external(a.per_ap[1][0]) == 2);
  CHECK(a.distinct_seeds().size() == 1);
  CHECK_THROWS(local_topk(inst, LocalScore::local_rr_greedy));
}

TEST_CASE("pagerank") {
  auto g = cimtest::make_graph(4, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}, {0, 1, 1.0}});
  const auto pr = pagerank(*g);
  CHECK(std::accumulate(pr.begin(), pr.end(), 0.0) == doctest::Approx(1.0));
  // Reference power iteration on the transposed graph.
  const int n = 4;
  std::vector<std::vector<int>> out_t(n);
  for (const auto& e : g->edges()) out_t[e.dst].push_back(static_cast<int>(e.src));
  std::vector<double> x(n, 0.25);
  for (int it = 0; it < 500; ++it) {
    std::vector<double> y(n, 0.15 / n);
    double dangling = 0;
    for (int u = 0; u < n; ++u) {
      if (out_t[u].empty()) dangling += x[u];
      for (int v : out_t[u]) y[v] += 0.85 * x[u] / out_t[u].size();
    }
    for (int v = 0; v < n; ++v) y[v] += 0.85 * dangling / n;
    x = y;
  }
  for (int v = 0; v < n; ++v) CHECK(pr[v] == doctest::Approx(x[v]).epsilon(1e-6));
}

TEST_CASE("local score names") {
  CHECK(parse_local_score("degree") == LocalScore::degree);
  CHECK(parse_local_score("pagerank") == LocalScore::pagerank);
  CHECK_THROWS(parse_local_score("betweenness"));
}

TEST_CASE("greedy checkpoints can cancel") {
  const auto inst = cimtest::t2(2);
  ExactOracle oracle(inst.pp_graph(), Model::ic);
  GreedyOptions opts;
  int calls = 0;
  opts.checkpoint = [&] {
    if (++calls > 1) throw Cancelled("stop");
  };
  CHECK_THROWS_AS(mg_greedy(inst, oracle, opts), Cancelled);
}
