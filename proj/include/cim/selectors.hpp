#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "cim/diffusion.hpp"
#include "cim/exact_oracle.hpp"
#include "cim/instance.hpp"
#include "cim/rr_collection.hpp"

namespace cim {

/// Marginal-gain evaluator over the PP graph. gain(v) is the gain of v with
/// respect to every node committed since the last reset(). Gains are
/// non-negative and never grow as more nodes are committed.
class GainOracle {
 public:
  virtual ~GainOracle() = default;
  virtual double gain(NodeId v) = 0;
  virtual void commit(NodeId v) = 0;
  virtual void reset() = 0;
};

/// Lambda(v | S) on an RR collection. Gains are integer counts.
class CoverageOracle final : public GainOracle {
 public:
  explicit CoverageOracle(RRCollection& coll) : coll_(&coll) {}
  double gain(NodeId v) override { return static_cast<double>(coll_->peek_marginal(v)); }
  void commit(NodeId v) override { coll_->commit(v); }
  void reset() override { coll_->reset_marginals(); }

 private:
  RRCollection* coll_;
};

/// sigma(v | S) from exhaustive enumeration. Values are snapped to a 2^-40
/// grid so mathematically equal gains compare equal.
class ExactOracle final : public GainOracle {
 public:
  ExactOracle(const Graph& g, Model model, OracleBudget budget = {});
  double gain(NodeId v) override;
  void commit(NodeId v) override;
  void reset() override;
  double spread(std::span<const NodeId> seeds);

 private:
  const Graph* g_;
  Model model_;
  OracleBudget budget_;
  std::vector<NodeId> committed_;
  double base_ = 0.0;
  std::map<std::vector<NodeId>, double> memo_;
};

/// sigma(v | S) averaged over a fixed sample of live-edge worlds (common
/// random numbers across every evaluation), so estimated gains are exactly
/// submodular.
class MonteCarloOracle final : public GainOracle {
 public:
  MonteCarloOracle(const Graph& g, Model model, std::uint64_t trials, std::uint64_t seed);
  double gain(NodeId v) override;
  void commit(NodeId v) override;
  void reset() override;

 private:
  std::uint64_t spread_from(NodeId v, bool mark);

  FixedWorlds worlds_;
  NodeId n_;
  std::vector<std::uint8_t> active_;  // world-major, n_ per world
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> queue_;
};

struct GreedyOptions {
  /// CELF lazy evaluation. Selections are identical either way.
  bool lazy = true;
  /// Called before every selection; may throw (e.g. Cancelled).
  std::function<void()> checkpoint;
};

struct Selection {
  std::size_t ap;
  NodeId node;
  double gain;
};

struct GreedyResult {
  SeedAssignment assignment;
  std::vector<Selection> trace;  // selection order
  std::uint64_t evaluations = 0;
};

/// Repeatedly takes the highest-gain edge from the global candidate pool,
/// dropping an AP's edges once it holds k seeds. Ties: higher gain, lower AP
/// index, lower node id. Zero-gain edges stay selectable.
GreedyResult mg_greedy(const Instance& inst, GainOracle& oracle, const GreedyOptions& opts = {});

/// Round-robin over live APs in ascending order; each picks its best
/// remaining candidate and commits it before the next AP chooses.
GreedyResult rr_greedy(const Instance& inst, GainOracle& oracle, const GreedyOptions& opts = {});

enum class LocalScore { degree, pagerank, local_rr_greedy };

struct PageRankParams {
  double damping = 0.85;
  double tolerance = 1e-8;  // L1 change
  int max_iterations = 100;
};

/// PageRank over the reversed edges (an edge u->v is read as v linking to u),
/// so influential sources score high. Dangling mass is spread uniformly.
std::vector<double> pagerank(const Graph& g, const PageRankParams& params = {});

struct LocalOptions {
  /// Score degree/PageRank on G instead of P.
  bool on_full_graph = false;
  PageRankParams pagerank;
  /// Required for local_rr_greedy; its greedy state is reset per AP.
  RRCollection* rr = nullptr;
};

/// Ranks each AP's candidates independently and keeps the top k. Ties go to
/// the lower node id. Different APs may receive the same seed.
SeedAssignment local_topk(const Instance& inst, LocalScore score, const LocalOptions& opts = {});

LocalScore parse_local_score(const std::string& name);

}  // namespace cim
