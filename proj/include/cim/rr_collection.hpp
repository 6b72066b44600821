#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cim/diffusion.hpp"
#include "cim/graph.hpp"
#include "cim/random.hpp"

namespace cim {

/// Reverse-reachable set: the root plus every node that reaches it in one
/// sampled live-edge graph. Members are sorted.
struct RRSet {
  NodeId root = kNoNode;
  std::vector<NodeId> members;
};

/// Samples RR sets with reusable scratch. IC runs a reverse BFS testing each
/// in-edge once; LT runs a reverse random walk that stops on "no edge" or on
/// revisiting a node.
class RRSampler {
 public:
  RRSampler(const Graph& g, Model model);
  /// Appends the members (unsorted, root first) to `out`; returns the root.
  NodeId sample(Rng& rng, std::vector<NodeId>& out);

 private:
  const Graph* g_;
  Model model_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

RRSet sample_rr_set(const Graph& g, Model model, Rng& rng);

/// A bag of RR sets with an inverted node -> set index and the bookkeeping
/// greedy coverage maximization needs: covered flags per set and, per node,
/// the number of still-uncovered sets containing it.
///
/// Sample i is drawn from substream(stream_seed, i), so a collection depends
/// only on (graph, model, stream seed, size), never on worker count or on how
/// extend() calls were batched.
class RRCollection {
 public:
  RRCollection() = default;
  RRCollection(const Graph& g, Model model, std::uint64_t stream_seed);

  /// Fixture constructor: explicit member lists over nodes 0..num_nodes-1.
  /// Roots are taken as the first member. Cannot be extended.
  static RRCollection from_sets(NodeId num_nodes, const std::vector<std::vector<NodeId>>& sets);

  /// Appends `count` fresh sets. Throws BudgetError when the stored members
  /// would exceed the byte budget (0 = unlimited); the collection is left
  /// unchanged in that case.
  void extend(std::uint64_t count, unsigned workers = 1);

  void set_byte_budget(std::uint64_t bytes) noexcept { byte_budget_ = bytes; }
  std::uint64_t stream_seed() const noexcept { return stream_seed_; }

  std::size_t size() const noexcept { return roots_.size(); }
  NodeId num_nodes() const noexcept { return num_nodes_; }
  NodeId root(std::size_t set) const noexcept { return roots_[set]; }
  std::span<const NodeId> members(std::size_t set) const noexcept {
    return {members_.data() + offsets_[set], members_.data() + offsets_[set + 1]};
  }
  std::span<const std::uint32_t> sets_containing(NodeId v) const noexcept { return index_[v]; }
  std::uint64_t total_members() const noexcept { return members_.size(); }
  /// Approximate bytes held by members and the inverted index.
  std::uint64_t stored_bytes() const noexcept;

  /// Number of sets hit by `seeds`. Independent of the greedy state.
  std::uint64_t coverage(std::span<const NodeId> seeds) const;

  /// Greedy state: uncovered sets containing v, O(1).
  std::uint64_t peek_marginal(NodeId v) const noexcept { return marginal_[v]; }
  /// Marks every set containing v covered and updates the counters of their
  /// members. Committing a node twice is a no-op.
  void commit(NodeId v);
  bool covered(std::size_t set) const noexcept { return covered_[set] != 0; }
  std::uint64_t covered_count() const noexcept { return covered_count_; }
  /// Clears all commits.
  void reset_marginals();

  /// "CIMR1", u64 node count, u64 set count, set-count+1 offsets, roots,
  /// members; little-endian 64-bit words.
  void write_binary(std::ostream& out) const;
  static RRCollection read_binary(std::istream& in);

 private:
  void append(NodeId root, std::span<const NodeId> sorted_members);

  const Graph* g_ = nullptr;
  Model model_ = Model::ic;
  std::uint64_t stream_seed_ = 0;
  NodeId num_nodes_ = 0;
  std::uint64_t byte_budget_ = 0;

  std::vector<NodeId> roots_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<NodeId> members_;
  std::vector<std::vector<std::uint32_t>> index_;

  std::vector<char> covered_;
  std::vector<std::uint64_t> marginal_;
  std::vector<char> committed_;
  std::uint64_t covered_count_ = 0;
};

}  // namespace cim
