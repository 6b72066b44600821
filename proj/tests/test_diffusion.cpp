#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cim/diffusion.hpp"
#include "cim/errors.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace cim;

namespace {

std::set<NodeId> reachable(const Graph& g, std::vector<NodeId> seeds) {
  std::set<NodeId> seen(seeds.begin(), seeds.end());
  while (!seeds.empty()) {
    NodeId u = seeds.back();
    seeds.pop_back();
    for (NodeId v : g.out_neighbors(u))
      if (seen.insert(v).second) seeds.push_back(v);
  }
  return seen;
}

std::shared_ptr<const Graph> constant_graph(double p, std::uint64_t seed) {
  auto g = cimtest::random_wc_graph(200, 3, seed);
  auto edges = g->edges();
  for (auto& e : edges) e.value = p;
  return cimtest::make_graph(g->num_nodes(), edges);
}

}  // namespace

TEST_CASE("deterministic cascades") {
  for (double p : {0.0, 1.0}) {
    auto g = constant_graph(p, 3);
    Rng rng(1);
    const std::vector<NodeId> seeds{0, 17};
    auto active = simulate_once(*g, Model::ic, seeds, rng);
    std::set<NodeId> got(active.begin(), active.end());
    CHECK(got.size() == active.size());
    if (p == 1.0)
      CHECK(got == reachable(*g, seeds));
    else
      CHECK(got == std::set<NodeId>(seeds.begin(), seeds.end()));
    const auto est = mc_spread(*g, Model::ic, seeds, 50, 9);
    CHECK(est.mean == static_cast<double>(got.size()));
    CHECK(est.std_error == 0.0);
  }
}

TEST_CASE("T1 single diffusion from node 1") {
  const auto inst = cimtest::t1();
  const Graph& p = inst.pp_graph();
  const NodeId n1 = inst.graph_to_pp(1), n3 = inst.graph_to_pp(3), n4 = inst.graph_to_pp(4);
  int with4 = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    Rng rng(s);
    const std::vector<NodeId> seeds{n1};
    auto active = simulate_once(p, Model::ic, seeds, rng);
    std::set<NodeId> got(active.begin(), active.end());
    CHECK((got.size() == 2 || got.size() == 3));
    CHECK(got.count(n1));
    CHECK(got.count(n3));
    with4 += got.count(n4) ? 1 : 0;
  }
  CHECK(std::abs(with4 / 2000.0 - 0.5) < 0.05);
}

TEST_CASE("mc_spread on T1 matches the exact value") {
  const auto inst = cimtest::t1();
  const std::vector<NodeId> seeds{inst.graph_to_pp(1)};
  const auto est = mc_spread(inst.pp_graph(), Model::ic, seeds, 100000, 4);
  CHECK(est.trials == 100000);
  CHECK(std::abs(est.mean - 2.5) <= 3 * est.std_error);
}

TEST_CASE("empty seeds and errors") {
  const auto inst = cimtest::t1();
  const auto est = mc_spread(inst.pp_graph(), Model::ic, {}, 100, 1);
  CHECK(est.mean == 0.0);
  CHECK(est.std_error == 0.0);
  Rng rng(0);
  const std::vector<NodeId> bad{99};
  CHECK_THROWS_AS(simulate_once(inst.pp_graph(), Model::ic, bad, rng), ValidationError);
  auto heavy = cimtest::make_graph(3, {{0, 2, 0.7}, {1, 2, 0.7}});
  const std::vector<NodeId> s0{0};
  CHECK_THROWS_AS(simulate_once(*heavy, Model::lt, s0, rng), ValidationError);
}

TEST_CASE("fixed seed gives bit-identical trials and worker-independent estimates") {
  auto g = cimtest::random_wc_graph(400, 4, 21);
  const std::vector<NodeId> seeds{1, 2, 3};
  for (Model m : {Model::ic, Model::lt}) {
    const auto a = mc_spread(*g, m, seeds, 3000, 77, 1);
    const auto b = mc_spread(*g, m, seeds, 3000, 77, 4);
    const auto c = mc_spread(*g, m, seeds, 3000, 77, 3);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == c.mean);
    Rng r1(5), r2(5);
    auto x = simulate_once(*g, m, seeds, r1);
    auto y = simulate_once(*g, m, seeds, r2);
    CHECK(x == y);
  }
}

TEST_CASE("each IC edge is drawn at most once per trial") {
  auto g = cimtest::random_wc_graph(300, 5, 8);
  Simulator sim(*g);
  std::vector<std::uint32_t> counter(g->num_edges(), 0);
  sim.set_draw_counter(&counter);
  const std::vector<NodeId> seeds{0, 5, 9, 100};
  for (std::uint64_t t = 0; t < 200; ++t) {
    std::fill(counter.begin(), counter.end(), 0);
    Rng rng(t);
    sim.run(Model::ic, seeds, rng);
    CHECK(*std::max_element(counter.begin(), counter.end()) <= 1);
  }
}

TEST_CASE("lt with a single full-weight chain is deterministic") {
  auto g = cimtest::make_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const std::vector<NodeId> seeds{0};
  const auto est = mc_spread(*g, Model::lt, seeds, 100, 2);
  CHECK(est.mean == 4.0);
}

TEST_CASE("mc spread agrees with brute force on random tiny instances") {
  std::mt19937_64 gen(101);
  for (bool lt : {false, true}) {
    cimtest::RandomSpec spec;
    spec.lt = lt;
    for (int trial = 0; trial < 15; ++trial) {
      const auto inst = cimtest::random_instance(gen, spec);
      const Graph& p = inst.pp_graph();
      const auto tiny = cimtest::to_tiny(p);
      const std::vector<NodeId> seeds{0, static_cast<NodeId>(p.num_nodes() - 1)};
      const double exact = cimtest::brute_spread(tiny, lt, {0, static_cast<int>(p.num_nodes() - 1)});
      const auto est = mc_spread(p, lt ? Model::lt : Model::ic, seeds, 20000, gen());
      CHECK(std::abs(est.mean - exact) <= 4 * est.std_error + 1e-12);
    }
  }
}

TEST_CASE("fixed worlds reproduce the spread") {
  std::mt19937_64 gen(12);
  for (bool lt : {false, true}) {
    cimtest::RandomSpec spec;
    spec.lt = lt;
    const auto inst = cimtest::random_instance(gen, spec);
    const Graph& p = inst.pp_graph();
    FixedWorlds worlds(p, lt ? Model::lt : Model::ic, 60000, 3);
    double total = 0;
    for (std::uint64_t w = 0; w < worlds.count(); ++w) {
      std::vector<NodeId> stack{0};
      std::set<NodeId> seen{0};
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (std::size_t i = 0; i < p.out_degree(u); ++i)
          if (worlds.edge_live(w, p.out_edge_begin(u) + i) &&
              seen.insert(p.out_neighbors(u)[i]).second)
            stack.push_back(p.out_neighbors(u)[i]);
      }
      total += static_cast<double>(seen.size());
    }
    const double exact = cimtest::brute_spread(cimtest::to_tiny(p), lt, {0});
    CHECK(total / 60000.0 == doctest::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("model names") {
  CHECK(parse_model("ic") == Model::ic);
  CHECK(parse_model("LT") == Model::lt);
  CHECK_THROWS(parse_model("sir"));
}
