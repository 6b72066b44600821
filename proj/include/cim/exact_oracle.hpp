#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cim/diffusion.hpp"
#include "cim/instance.hpp"

namespace cim {

/// Limits for the exhaustive routines. Exceeding either throws BudgetError;
/// nothing here ever falls back to sampling.
struct OracleBudget {
  /// IC: fractional edges (0 < p < 1) reachable from the seeds. LT: log2 of
  /// the number of live-edge worlds.
  std::size_t max_probabilistic_edges = 20;
  std::uint64_t max_assignments = 1'000'000;
};

/// Exact expected spread by live-edge enumeration. Only the part of the graph
/// reachable from `seeds` through positive edges is enumerated; edges with
/// value 0 or 1 never enter the exponent.
double exact_spread(const Graph& g, Model model, std::span<const NodeId> seeds,
                    const OracleBudget& budget = {});

struct OptimumResult {
  SeedAssignment assignment;
  std::vector<NodeId> seeds;  // distinct, ascending
  double spread = 0.0;
};

/// Best matroid-feasible assignment by exhaustive search over full-capacity
/// assignments (spread is monotone, so partial ones never win). Ties go to the
/// lexicographically smallest distinct seed set.
OptimumResult exact_optimum(const Instance& inst, Model model, const OracleBudget& budget = {});

struct CurvatureResult {
  double gamma_max = 0.0;
  /// Candidate edges (AP index, node) skipped because their own spread is 0.
  std::vector<std::pair<std::size_t, NodeId>> skipped;
};

/// gamma_max = 1 - min over candidate edges e of
/// (sigma(C) - sigma(C \ {e})) / sigma({e}), with every sigma taken over the
/// distinct node set of its edge set. Clamped to [0, 1].
CurvatureResult curvature_gamma_max(const Instance& inst, Model model,
                                    const OracleBudget& budget = {});

/// Number of full-capacity assignments, prod_u C(|C_u|, min(k, |C_u|)),
/// saturating at UINT64_MAX.
std::uint64_t count_full_assignments(const Instance& inst);

/// Calls fn(assignment) for every full-capacity feasible assignment, in
/// mixed-radix order over APs with lexicographic combinations per AP.
void for_each_full_assignment(const Instance& inst,
                              const std::function<void(const SeedAssignment&)>& fn);

}  // namespace cim
