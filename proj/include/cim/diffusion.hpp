#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cim/graph.hpp"
#include "cim/random.hpp"

namespace cim {

enum class Model { ic, lt };

Model parse_model(const std::string& name);
const char* to_string(Model m) noexcept;

struct SpreadEstimate {
  double mean = 0.0;
  std::uint64_t trials = 0;
  /// Sample standard deviation / sqrt(trials).
  double std_error = 0.0;
};

/// Forward diffusion on a fixed graph with reusable scratch space.
///
/// IC: every newly active u tries each out-edge (u,v) with inactive v once,
/// succeeding with probability p(u,v). LT: each touched node draws its
/// threshold uniformly in [0,1) and activates once the summed weight of its
/// active in-neighbors exceeds it. Frontier is FIFO.
class Simulator {
 public:
  explicit Simulator(const Graph& g);

  /// Returns the final active set: seeds first, then in activation order.
  /// Valid until the next call.
  std::span<const NodeId> run(Model model, std::span<const NodeId> seeds, Rng& rng);

  /// When set, counts random draws per forward edge index (IC only).
  void set_draw_counter(std::vector<std::uint32_t>* counter) noexcept { draws_ = counter; }

 private:
  const Graph* g_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeId> active_;
  std::vector<double> threshold_;
  std::vector<double> acc_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t>* draws_ = nullptr;
};

/// One diffusion. Throws ValidationError for an out-of-range seed and for LT
/// on a graph whose in-weights exceed 1.
std::vector<NodeId> simulate_once(const Graph& g, Model model, std::span<const NodeId> seeds,
                                  Rng& rng);

/// Monte-Carlo spread over `trials` independent diffusions. Trial t draws from
/// substream(seed, t), so the result does not depend on `workers`.
SpreadEstimate mc_spread(const Graph& g, Model model, std::span<const NodeId> seeds,
                         std::uint64_t trials, std::uint64_t seed, unsigned workers = 1);

/// A fixed sample of live-edge worlds (common random numbers). Whether an
/// edge is live in world w is a hash of (world seed, edge), so every seed set
/// is evaluated on the same worlds and the averaged spread is exactly monotone
/// and submodular. LT uses the live-edge equivalent: each node keeps at most
/// one in-edge, picked with probability equal to its weight.
class FixedWorlds {
 public:
  FixedWorlds(const Graph& g, Model model, std::uint64_t count, std::uint64_t seed);

  std::uint64_t count() const noexcept { return count_; }
  const Graph& graph() const noexcept { return *g_; }

  /// `edge` is the forward CSR index (out_edge_begin(src) + offset).
  bool edge_live(std::uint64_t world, std::size_t edge) const noexcept;

 private:
  const Graph* g_;
  Model model_;
  std::uint64_t count_;
  std::uint64_t seed_;
  std::vector<NodeId> out_dst_;
  // LT: forward edge e is live iff the destination's world draw lands in [lo, hi).
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace cim
