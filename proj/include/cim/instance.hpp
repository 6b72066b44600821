#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "cim/graph.hpp"

namespace cim {

/// A capacity-constrained query over a graph: the AP set, per-AP capacity k,
/// the passive-participant subgraph P (every node outside the AP set, every
/// edge with both endpoints outside it) and the per-AP candidate lists.
///
/// Candidate and seed ids are dense ids of P. APs are referred to by their
/// index into aps() (0..d-1), which follows ascending graph id.
class Instance {
 public:
  Instance() = default;

  const Graph& graph() const noexcept { return *g_; }
  std::shared_ptr<const Graph> graph_ptr() const noexcept { return g_; }
  const Graph& pp_graph() const noexcept { return p_; }

  /// AP node ids in G, ascending.
  std::span<const NodeId> aps() const noexcept { return aps_; }
  std::size_t num_aps() const noexcept { return aps_.size(); }
  std::size_t k() const noexcept { return k_; }

  /// Candidate list C_u of AP index `ap`, as ascending P ids.
  std::span<const NodeId> candidates(std::size_t ap) const noexcept { return candidates_[ap]; }
  /// |C| = sum of |C_u|.
  std::size_t num_candidate_edges() const noexcept { return candidate_edges_; }
  /// Distinct candidate PP nodes, ascending P ids.
  std::span<const NodeId> candidate_nodes() const noexcept { return candidate_nodes_; }
  /// AP indices whose candidate list contains PP node v.
  std::span<const std::uint32_t> ap_friends(NodeId v) const noexcept {
    return {friend_aps_.data() + friend_offsets_[v], friend_aps_.data() + friend_offsets_[v + 1]};
  }

  NodeId pp_to_graph(NodeId v) const noexcept { return p_to_g_[v]; }
  /// P id of a graph node, or kNoNode when the node is an AP.
  NodeId graph_to_pp(NodeId v) const noexcept { return g_to_p_[v]; }
  ExternalId pp_external(NodeId v) const noexcept { return g_->external_id(p_to_g_[v]); }
  ExternalId ap_external(std::size_t ap) const noexcept { return g_->external_id(aps_[ap]); }
  /// AP index of an external id, or -1.
  std::ptrdiff_t find_ap(ExternalId id) const noexcept;

  /// sum over APs of min(k, |C_u|): the most seeds any feasible assignment holds.
  std::size_t max_slots() const noexcept;

  friend Instance build_instance(std::shared_ptr<const Graph> g, std::span<const NodeId> aps,
                                 std::size_t k);

 private:
  std::shared_ptr<const Graph> g_;
  Graph p_;
  std::vector<NodeId> aps_;
  std::size_t k_ = 0;
  std::vector<std::vector<NodeId>> candidates_;
  std::size_t candidate_edges_ = 0;
  std::vector<NodeId> candidate_nodes_;
  std::vector<std::uint64_t> friend_offsets_;
  std::vector<std::uint32_t> friend_aps_;
  std::vector<NodeId> p_to_g_;
  std::vector<NodeId> g_to_p_;
};

/// `aps` holds dense G ids (any order, duplicates ignored).
Instance build_instance(std::shared_ptr<const Graph> g, std::span<const NodeId> aps, std::size_t k);

/// Uniformly samples floor(fraction * n) distinct nodes. Result ascending.
std::vector<NodeId> select_random_aps(const Graph& g, double fraction, std::uint64_t seed);

/// One external id per line ('#' comments allowed). Unknown ids throw.
std::vector<NodeId> read_ap_file(std::istream& in, const Graph& g);
std::vector<NodeId> read_ap_file(const std::filesystem::path& path, const Graph& g);

/// Per-AP ordered seed lists. Seeds are P ids; index i belongs to AP i.
struct SeedAssignment {
  std::vector<std::vector<NodeId>> per_ap;

  SeedAssignment() = default;
  explicit SeedAssignment(std::size_t num_aps) : per_ap(num_aps) {}

  /// Distinct seed set S, ascending.
  std::vector<NodeId> distinct_seeds() const;
  /// Number of (AP, seed) pairs.
  std::size_t num_edges() const noexcept;
  bool operator==(const SeedAssignment&) const = default;
};

/// Throws ValidationError naming the AP when |S_u| > k, a seed is not in
/// C_u, or an AP lists the same seed twice.
void check_feasible(const Instance& inst, const SeedAssignment& s);

/// Parses "ap_id seed_id" lines (external ids). Feasibility is not checked.
SeedAssignment read_assignment(std::istream& in, const Instance& inst);

}  // namespace cim
