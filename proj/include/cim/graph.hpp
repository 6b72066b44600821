#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cim {

using NodeId = std::uint32_t;
using ExternalId = std::uint64_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Edge {
  NodeId src;
  NodeId dst;
  double value;
  bool operator==(const Edge&) const = default;
};

/// How edge values are assigned while loading an edge list.
enum class WeightMode {
  explicit_values,      // third column, required
  weighted_cascade_ic,  // p(u,v) = 1 / indeg(v)
  uniform_ic,           // p(u,v) = constant
  weighted_cascade_lt,  // w(u,v) = 1 / indeg(v), LT sums checked
};

struct LoadOptions {
  WeightMode mode = WeightMode::weighted_cascade_ic;
  bool undirected = false;
  double uniform_p = 0.1;
  /// Check sum of in-weights <= 1 for every node. Always on for
  /// weighted_cascade_lt.
  bool check_lt = false;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

/// Directed weighted graph in CSR form, with both forward and reverse
/// adjacency over dense ids 0..n-1. Immutable after construction.
class Graph {
 public:
  static constexpr double kLtSlack = 1e-9;

  Graph() = default;

  /// Builds from dense edges. Edges must already be free of self-loops and
  /// duplicates; values must lie in [0, 1]. `external` maps dense -> external
  /// id; when empty the identity mapping is used.
  Graph(NodeId n, std::vector<Edge> edges, std::vector<ExternalId> external = {});

  NodeId num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId u) const noexcept {
    return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const double> out_values(NodeId u) const noexcept {
    return {out_values_.data() + out_offsets_[u], out_values_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const noexcept {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  std::span<const double> in_values(NodeId v) const noexcept {
    return {in_values_.data() + in_offsets_[v], in_values_.data() + in_offsets_[v + 1]};
  }
  /// Position of u's first out-edge in the global forward edge order.
  std::size_t out_edge_begin(NodeId u) const noexcept { return out_offsets_[u]; }
  std::size_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const noexcept { return in_offsets_[v + 1] - in_offsets_[v]; }

  double in_weight_sum(NodeId v) const noexcept { return in_weight_sum_[v]; }
  /// True when every node's in-weights sum to at most 1 (+slack).
  bool satisfies_lt() const noexcept { return lt_ok_; }
  /// Throws ValidationError naming the first node whose in-weights exceed 1.
  void require_lt() const;

  ExternalId external_id(NodeId v) const noexcept { return external_[v]; }
  std::span<const ExternalId> external_ids() const noexcept { return external_; }
  /// Dense id of an external id, or kNoNode.
  NodeId find(ExternalId id) const noexcept;

  /// All edges in forward CSR order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph& a, const Graph& b);

  std::span<const std::uint64_t> raw_out_offsets() const noexcept { return out_offsets_; }
  std::span<const NodeId> raw_out_targets() const noexcept { return out_targets_; }
  std::span<const double> raw_out_values() const noexcept { return out_values_; }

 private:
  NodeId n_ = 0;
  std::vector<std::uint64_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<double> out_values_;
  std::vector<std::uint64_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
  std::vector<double> in_values_;
  std::vector<double> in_weight_sum_;
  std::vector<ExternalId> external_;
  std::unordered_map<ExternalId, NodeId> lookup_;
  bool lt_ok_ = true;
};

/// Parses "src dst [value]" lines. '#' lines are comments; an optional
/// "n=<N>" line declares external ids 0..N-1 (trailing isolated nodes).
/// Dense ids follow ascending external id.
Graph load_edge_list(std::istream& in, const LoadOptions& opts, LoadStats* stats = nullptr);
Graph load_edge_list(const std::filesystem::path& path, const LoadOptions& opts,
                     LoadStats* stats = nullptr);

/// Writes the graph as explicit-valued edge list text (values printed in
/// shortest round-trip form). Emits an "n=N" header when external ids
/// 0..N-1 are all present.
void write_edge_list(std::ostream& out, const Graph& g);

/// Binary adjacency cache: "CIMG1", u64 n, u64 m, n external ids, n+1 offsets,
/// m targets, m IEEE-754 values; all little-endian 64-bit.
void write_binary_cache(std::ostream& out, const Graph& g);
Graph read_binary_cache(std::istream& in);
bool is_binary_cache(const std::filesystem::path& path);

/// Loads either format, detected by magic bytes.
Graph load_graph(const std::filesystem::path& path, const LoadOptions& opts,
                 LoadStats* stats = nullptr);

WeightMode parse_weight_mode(const std::string& name);

}  // namespace cim
