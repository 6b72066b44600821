#include "cim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cim/errors.hpp"
#include "cim/parallel.hpp"

namespace cim {

Model parse_model(const std::string& name) {
  if (name == "ic" || name == "IC") return Model::ic;
  if (name == "lt" || name == "LT") return Model::lt;
  throw ValidationError("unknown diffusion model '" + name + "'");
}

const char* to_string(Model m) noexcept { return m == Model::ic ? "ic" : "lt"; }

Simulator::Simulator(const Graph& g)
    : g_(&g), stamp_(g.num_nodes(), 0), threshold_(g.num_nodes(), 0.0), acc_(g.num_nodes(), 0.0) {
  active_.reserve(g.num_nodes());
}

// Stamp layout per epoch: 2*epoch = touched (LT threshold drawn), 2*epoch+1 = active.
std::span<const NodeId> Simulator::run(Model model, std::span<const NodeId> seeds, Rng& rng) {
  if (epoch_ >= std::numeric_limits<std::uint32_t>::max() / 2 - 1) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 0;
  }
  ++epoch_;
  const std::uint32_t touched = 2 * epoch_;
  const std::uint32_t active = 2 * epoch_ + 1;
  active_.clear();
  for (NodeId s : seeds) {
    if (stamp_[s] == active) continue;
    stamp_[s] = active;
    active_.push_back(s);
  }

  for (std::size_t head = 0; head < active_.size(); ++head) {
    const NodeId u = active_[head];
    auto targets = g_->out_neighbors(u);
    auto values = g_->out_values(u);
    const std::size_t base = g_->out_edge_begin(u);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const NodeId v = targets[i];
      if (stamp_[v] == active) continue;
      if (model == Model::ic) {
        const double p = values[i];
        if (draws_ && p > 0.0 && p < 1.0) ++(*draws_)[base + i];
        if (coin(rng, p)) {
          stamp_[v] = active;
          active_.push_back(v);
        }
      } else {
        if (stamp_[v] != touched) {
          stamp_[v] = touched;
          threshold_[v] = rng.uniform();
          acc_[v] = 0.0;
        }
        acc_[v] += values[i];
        if (acc_[v] > threshold_[v]) {
          stamp_[v] = active;
          active_.push_back(v);
        }
      }
    }
  }
  return active_;
}

namespace {

void check_inputs(const Graph& g, Model model, std::span<const NodeId> seeds) {
  for (NodeId s : seeds)
    if (s >= g.num_nodes()) throw ValidationError("seed id " + std::to_string(s) + " out of range");
  if (model == Model::lt) g.require_lt();
}

}  // namespace

std::vector<NodeId> simulate_once(const Graph& g, Model model, std::span<const NodeId> seeds,
                                  Rng& rng) {
  check_inputs(g, model, seeds);
  Simulator sim(g);
  auto out = sim.run(model, seeds, rng);
  return {out.begin(), out.end()};
}

SpreadEstimate mc_spread(const Graph& g, Model model, std::span<const NodeId> seeds,
                         std::uint64_t trials, std::uint64_t seed, unsigned workers) {
  if (trials < 1) throw ValidationError("trial count must be positive");
  check_inputs(g, model, seeds);
  SpreadEstimate est;
  est.trials = trials;
  if (seeds.empty()) return est;

  const std::size_t chunks = std::max(1u, workers);
  std::vector<std::uint64_t> sum(chunks, 0), sum_sq(chunks, 0);
  const std::uint64_t step = (trials + chunks - 1) / chunks;
  parallel_for(chunks, workers, [&](std::size_t begin, std::size_t end) {
    Simulator sim(g);
    for (std::size_t c = begin; c < end; ++c) {
      const std::uint64_t lo = c * step;
      const std::uint64_t hi = std::min(trials, lo + step);
      for (std::uint64_t t = lo; t < hi; ++t) {
        Rng rng(substream(seed, t));
        const std::uint64_t size = sim.run(model, seeds, rng).size();
        sum[c] += size;
        sum_sq[c] += size * size;
      }
    }
  });
  std::uint64_t total = 0, total_sq = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sum[c];
    total_sq += sum_sq[c];
  }
  const double r = static_cast<double>(trials);
  est.mean = static_cast<double>(total) / r;
  if (trials > 1) {
    // Integer sums keep this exact; var = (sum_sq - sum^2/r) / (r - 1).
    const long double s = total, ss = total_sq;
    long double var = (ss - s * s / trials) / (trials - 1);
    if (var < 0) var = 0;
    est.std_error = static_cast<double>(std::sqrt(var / trials));
  }
  return est;
}

FixedWorlds::FixedWorlds(const Graph& g, Model model, std::uint64_t count, std::uint64_t seed)
    : g_(&g), model_(model), count_(count), seed_(seed) {
  if (model == Model::lt) g.require_lt();
  out_dst_.resize(g.num_edges());
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    auto targets = g.out_neighbors(u);
    std::copy(targets.begin(), targets.end(), out_dst_.begin() + g.out_edge_begin(u));
  }
  if (model != Model::lt) return;
  lo_.assign(g.num_edges(), 0.0);
  hi_.assign(g.num_edges(), 0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto sources = g.in_neighbors(v);
    auto weights = g.in_values(v);
    double cum = 0.0;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const NodeId u = sources[j];
      auto outs = g.out_neighbors(u);
      const auto pos = std::lower_bound(outs.begin(), outs.end(), v) - outs.begin();
      const std::size_t e = g.out_edge_begin(u) + static_cast<std::size_t>(pos);
      lo_[e] = cum;
      cum += weights[j];
      hi_[e] = cum;
    }
  }
}

bool FixedWorlds::edge_live(std::uint64_t world, std::size_t edge) const noexcept {
  const std::uint64_t ws = substream(seed_, world);
  if (model_ == Model::ic) {
    const double p = g_->raw_out_values()[edge];
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    const double u = static_cast<double>(mix64(ws ^ mix64(edge)) >> 11) * 0x1.0p-53;
    return u < p;
  }
  const NodeId v = out_dst_[edge];
  const double u =
      static_cast<double>(mix64(ws ^ mix64(static_cast<std::uint64_t>(v) + (1ULL << 63))) >> 11) *
      0x1.0p-53;
  return u >= lo_[edge] && u < hi_[edge];
}

}  // namespace cim
