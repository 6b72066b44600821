#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "cim/graph.hpp"
#include "cim/instance.hpp"
#include "support/brute_force.hpp"

namespace cimtest {

std::shared_ptr<const cim::Graph> make_graph(cim::NodeId n, std::vector<cim::Edge> edges);

// Nodes 0..4, AP {0}; 0->1, 0->2, 1->3 (1), 2->3 (0.5), 3->4 (0.5).
cim::Instance t1(std::size_t k = 1);
// APs {0,1}, PPs 2..6, every edge has p = 1.
cim::Instance t2(std::size_t k = 1);

TinyGraph to_tiny(const cim::Graph& g);
std::vector<std::vector<int>> tiny_candidates(const cim::Instance& inst);

struct RandomSpec {
  int max_aps = 3;
  int max_pp = 8;
  int max_prob_edges = 10;
  int max_k = 2;
  bool lt = false;  // in-weights sum to at most 1
};

// Small instance with every AP having at least one candidate. Edge values
// are drawn from a coarse grid so exact ties are common.
cim::Instance random_instance(std::mt19937_64& gen, const RandomSpec& spec = {});

// Random graph with explicit weighted-cascade probabilities.
std::shared_ptr<const cim::Graph> random_wc_graph(cim::NodeId n, std::size_t avg_out,
                                                  std::uint64_t seed);

}  // namespace cimtest
