#include "cim/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

#include "cim/errors.hpp"
#include "cim/random.hpp"

namespace cim {

std::ptrdiff_t Instance::find_ap(ExternalId id) const noexcept {
  const NodeId v = g_->find(id);
  if (v == kNoNode) return -1;
  auto it = std::lower_bound(aps_.begin(), aps_.end(), v);
  if (it == aps_.end() || *it != v) return -1;
  return it - aps_.begin();
}

std::size_t Instance::max_slots() const noexcept {
  std::size_t total = 0;
  for (const auto& c : candidates_) total += std::min(k_, c.size());
  return total;
}

Instance build_instance(std::shared_ptr<const Graph> g, std::span<const NodeId> aps, std::size_t k) {
  Instance inst;
  const NodeId n = g->num_nodes();
  inst.aps_.assign(aps.begin(), aps.end());
  std::sort(inst.aps_.begin(), inst.aps_.end());
  inst.aps_.erase(std::unique(inst.aps_.begin(), inst.aps_.end()), inst.aps_.end());
  for (NodeId a : inst.aps_)
    if (a >= n) throw ValidationError("AP id " + std::to_string(a) + " not in graph");
  inst.k_ = k;

  std::vector<char> is_ap(n, 0);
  for (NodeId a : inst.aps_) is_ap[a] = 1;

  inst.g_to_p_.assign(n, kNoNode);
  std::vector<ExternalId> external;
  for (NodeId v = 0; v < n; ++v) {
    if (is_ap[v]) continue;
    inst.g_to_p_[v] = static_cast<NodeId>(inst.p_to_g_.size());
    inst.p_to_g_.push_back(v);
    external.push_back(g->external_id(v));
  }
  std::vector<Edge> pp_edges;
  for (NodeId u = 0; u < n; ++u) {
    if (is_ap[u]) continue;
    auto targets = g->out_neighbors(u);
    auto values = g->out_values(u);
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (!is_ap[targets[i]])
        pp_edges.push_back({inst.g_to_p_[u], inst.g_to_p_[targets[i]], values[i]});
  }
  const auto np = static_cast<NodeId>(inst.p_to_g_.size());
  inst.p_ = Graph(np, std::move(pp_edges), std::move(external));

  // Out-neighbors are already sorted by id, and the G->P map is monotone.
  inst.candidates_.resize(inst.aps_.size());
  std::vector<std::uint64_t> friend_count(static_cast<std::size_t>(np) + 1, 0);
  for (std::size_t i = 0; i < inst.aps_.size(); ++i) {
    for (NodeId v : g->out_neighbors(inst.aps_[i]))
      if (!is_ap[v]) inst.candidates_[i].push_back(inst.g_to_p_[v]);
    inst.candidate_edges_ += inst.candidates_[i].size();
    for (NodeId c : inst.candidates_[i]) ++friend_count[c + 1];
  }
  std::partial_sum(friend_count.begin(), friend_count.end(), friend_count.begin());
  inst.friend_offsets_ = friend_count;
  inst.friend_aps_.resize(inst.candidate_edges_);
  std::vector<std::uint64_t> fill(friend_count.begin(), friend_count.end() - 1);
  for (std::size_t i = 0; i < inst.aps_.size(); ++i)
    for (NodeId c : inst.candidates_[i]) inst.friend_aps_[fill[c]++] = static_cast<std::uint32_t>(i);
  for (NodeId v = 0; v < np; ++v)
    if (friend_count[v + 1] > friend_count[v]) inst.candidate_nodes_.push_back(v);

  inst.g_ = std::move(g);
  return inst;
}

std::vector<NodeId> select_random_aps(const Graph& g, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ValidationError("AP fraction must lie in (0, 1]");
  const NodeId n = g.num_nodes();
  const auto count = static_cast<std::size_t>(std::floor(fraction * n + 1e-9));
  if (count < 1) throw ValidationError("AP fraction selects no node");
  std::vector<NodeId> pool(n);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<NodeId> read_ap_file(std::istream& in, const Graph& g) {
  std::vector<NodeId> aps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok.front() == '#') continue;
    ExternalId id = 0;
    try {
      std::size_t used = 0;
      id = std::stoull(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad AP id '" + tok + "'");
    }
    const NodeId v = g.find(id);
    if (v == kNoNode) throw ValidationError("AP id " + tok + " not in graph");
    aps.push_back(v);
  }
  return aps;
}

std::vector<NodeId> read_ap_file(const std::filesystem::path& path, const Graph& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ap_file(in, g);
}

std::vector<NodeId> SeedAssignment::distinct_seeds() const {
  std::vector<NodeId> out;
  for (const auto& list : per_ap) out.insert(out.end(), list.begin(), list.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t SeedAssignment::num_edges() const noexcept {
  std::size_t total = 0;
  for (const auto& list : per_ap) total += list.size();
  return total;
}

void check_feasible(const Instance& inst, const SeedAssignment& s) {
  if (s.per_ap.size() != inst.num_aps()) throw ValidationError("assignment AP count mismatch");
  for (std::size_t a = 0; a < s.per_ap.size(); ++a) {
    const auto& list = s.per_ap[a];
    const std::string name = "AP " + std::to_string(inst.ap_external(a));
    if (list.size() > inst.k())
      throw ValidationError(name + " has " + std::to_string(list.size()) +
                            " seeds, capacity is " + std::to_string(inst.k()));
    auto cands = inst.candidates(a);
    std::vector<NodeId> sorted(list);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError(name + " lists a seed twice");
    for (NodeId v : list)
      if (!std::binary_search(cands.begin(), cands.end(), v))
        throw ValidationError(name + ": seed " + std::to_string(inst.pp_external(v)) +
                              " is not a passive friend");
  }
}

SeedAssignment read_assignment(std::istream& in, const Instance& inst) {
  SeedAssignment s(inst.num_aps());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first) || first.front() == '#') continue;
    ExternalId ap_id = 0, seed_id = 0;
    std::istringstream pair(line);
    if (!(pair >> ap_id >> seed_id)) throw ParseError(lineno, "expected 'ap_id seed_id'");
    const auto ap = inst.find_ap(ap_id);
    if (ap < 0) throw ValidationError("line " + std::to_string(lineno) + ": " +
                                      std::to_string(ap_id) + " is not an AP");
    const NodeId g = inst.graph().find(seed_id);
    const NodeId p = g == kNoNode ? kNoNode : inst.graph_to_pp(g);
    if (p == kNoNode)
      throw ValidationError("line " + std::to_string(lineno) + ": seed " +
                            std::to_string(seed_id) + " is not a passive participant");
    s.per_ap[static_cast<std::size_t>(ap)].push_back(p);
  }
  return s;
}

}  // namespace cim
