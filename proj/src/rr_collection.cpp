#include "cim/rr_collection.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

#include "cim/errors.hpp"
#include "cim/parallel.hpp"

namespace cim {

namespace {

constexpr std::string_view kMagic = "CIMR1";
constexpr std::uint64_t kBytesPerMember = sizeof(NodeId) + sizeof(std::uint32_t);

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 8))
    throw ParseError(0, "RR collection dump truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

RRSampler::RRSampler(const Graph& g, Model model) : g_(&g), model_(model), stamp_(g.num_nodes(), 0) {
  if (model == Model::lt) g.require_lt();
}

NodeId RRSampler::sample(Rng& rng, std::vector<NodeId>& out) {
  if (++epoch_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    epoch_ = 1;
  }
  const NodeId root = static_cast<NodeId>(rng.below(g_->num_nodes()));
  const std::size_t start = out.size();
  out.push_back(root);
  stamp_[root] = epoch_;

  if (model_ == Model::ic) {
    for (std::size_t head = start; head < out.size(); ++head) {
      const NodeId v = out[head];
      auto sources = g_->in_neighbors(v);
      auto probs = g_->in_values(v);
      for (std::size_t j = 0; j < sources.size(); ++j) {
        const NodeId u = sources[j];
        if (stamp_[u] == epoch_) continue;
        if (coin(rng, probs[j])) {
          stamp_[u] = epoch_;
          out.push_back(u);
        }
      }
    }
    return root;
  }

  NodeId cur = root;
  while (true) {
    auto sources = g_->in_neighbors(cur);
    if (sources.empty()) break;
    auto weights = g_->in_values(cur);
    const double draw = rng.uniform();
    double cum = 0.0;
    NodeId next = kNoNode;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      cum += weights[j];
      if (draw < cum) {
        next = sources[j];
        break;
      }
    }
    if (next == kNoNode || stamp_[next] == epoch_) break;
    stamp_[next] = epoch_;
    out.push_back(next);
    cur = next;
  }
  return root;
}

RRSet sample_rr_set(const Graph& g, Model model, Rng& rng) {
  if (g.num_nodes() == 0) throw ValidationError("cannot sample RR sets on an empty graph");
  RRSampler sampler(g, model);
  RRSet set;
  set.root = sampler.sample(rng, set.members);
  std::sort(set.members.begin(), set.members.end());
  return set;
}

RRCollection::RRCollection(const Graph& g, Model model, std::uint64_t stream_seed)
    : g_(&g),
      model_(model),
      stream_seed_(stream_seed),
      num_nodes_(g.num_nodes()),
      index_(g.num_nodes()),
      marginal_(g.num_nodes(), 0),
      committed_(g.num_nodes(), 0) {
  if (model == Model::lt) g.require_lt();
}

RRCollection RRCollection::from_sets(NodeId num_nodes, const std::vector<std::vector<NodeId>>& sets) {
  RRCollection c;
  c.num_nodes_ = num_nodes;
  c.index_.resize(num_nodes);
  c.marginal_.assign(num_nodes, 0);
  c.committed_.assign(num_nodes, 0);
  for (const auto& s : sets) {
    if (s.empty()) throw ValidationError("RR set must contain its root");
    std::vector<NodeId> sorted(s);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (NodeId v : sorted)
      if (v >= num_nodes) throw ValidationError("RR set member out of range");
    c.append(s.front(), sorted);
  }
  return c;
}

std::uint64_t RRCollection::stored_bytes() const noexcept {
  return members_.size() * kBytesPerMember + roots_.size() * (sizeof(NodeId) + 8 + 1);
}

void RRCollection::append(NodeId root, std::span<const NodeId> sorted_members) {
  const auto id = static_cast<std::uint32_t>(roots_.size());
  roots_.push_back(root);
  members_.insert(members_.end(), sorted_members.begin(), sorted_members.end());
  offsets_.push_back(members_.size());
  bool hit = false;
  for (NodeId v : sorted_members) {
    index_[v].push_back(id);
    hit = hit || committed_[v];
  }
  covered_.push_back(hit ? 1 : 0);
  if (hit) {
    ++covered_count_;
  } else {
    for (NodeId v : sorted_members) ++marginal_[v];
  }
}

void RRCollection::extend(std::uint64_t count, unsigned workers) {
  if (count == 0) return;
  if (!g_) throw std::logic_error("fixture RR collections cannot be extended");
  if (num_nodes_ == 0) throw ValidationError("cannot sample RR sets on an empty graph");
  if (size() + count > std::numeric_limits<std::uint32_t>::max())
    throw BudgetError("RR collection would exceed 2^32 sets");

  constexpr std::uint64_t kBatch = 1 << 14;
  const std::uint64_t first = size();
  std::vector<NodeId> roots;
  std::vector<std::uint64_t> offsets{0};
  std::vector<NodeId> members;
  roots.reserve(count);
  offsets.reserve(count + 1);

  std::vector<std::vector<NodeId>> batch;
  std::vector<NodeId> batch_roots;
  for (std::uint64_t done = 0; done < count; done += kBatch) {
    const std::uint64_t len = std::min(kBatch, count - done);
    batch.assign(len, {});
    batch_roots.assign(len, kNoNode);
    parallel_for(len, workers, [&](std::size_t begin, std::size_t end) {
      RRSampler sampler(*g_, model_);
      for (std::size_t i = begin; i < end; ++i) {
        Rng rng(substream(stream_seed_, first + done + i));
        batch_roots[i] = sampler.sample(rng, batch[i]);
        std::sort(batch[i].begin(), batch[i].end());
      }
    });
    for (std::uint64_t i = 0; i < len; ++i) {
      roots.push_back(batch_roots[i]);
      members.insert(members.end(), batch[i].begin(), batch[i].end());
      offsets.push_back(members.size());
    }
    if (byte_budget_ && stored_bytes() + members.size() * kBytesPerMember > byte_budget_)
      throw BudgetError("RR collection exceeds byte budget of " + std::to_string(byte_budget_) +
                        " after " + std::to_string(first + done + len) + " sets");
  }
  for (std::size_t i = 0; i < roots.size(); ++i)
    append(roots[i], std::span<const NodeId>(members.data() + offsets[i], members.data() + offsets[i + 1]));
}

std::uint64_t RRCollection::coverage(std::span<const NodeId> seeds) const {
  std::vector<char> hit(size(), 0);
  std::uint64_t count = 0;
  for (NodeId v : seeds) {
    if (v >= num_nodes_) continue;
    for (auto id : index_[v])
      if (!hit[id]) {
        hit[id] = 1;
        ++count;
      }
  }
  return count;
}

void RRCollection::commit(NodeId v) {
  if (committed_[v]) return;
  committed_[v] = 1;
  for (auto id : index_[v]) {
    if (covered_[id]) continue;
    covered_[id] = 1;
    ++covered_count_;
    for (NodeId w : members(id)) --marginal_[w];
  }
}

void RRCollection::reset_marginals() {
  std::fill(covered_.begin(), covered_.end(), 0);
  std::fill(committed_.begin(), committed_.end(), 0);
  covered_count_ = 0;
  for (NodeId v = 0; v < num_nodes_; ++v) marginal_[v] = index_[v].size();
}

void RRCollection::write_binary(std::ostream& out) const {
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  put_u64(out, num_nodes_);
  put_u64(out, size());
  for (auto off : offsets_) put_u64(out, off);
  for (NodeId r : roots_) put_u64(out, r);
  for (NodeId v : members_) put_u64(out, v);
}

RRCollection RRCollection::read_binary(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), 5) || std::string_view(magic.data(), 5) != kMagic)
    throw ParseError(0, "not a CIMR1 RR collection dump");
  const std::uint64_t n = get_u64(in);
  const std::uint64_t theta = get_u64(in);
  if (n >= kNoNode || theta >= std::numeric_limits<std::uint32_t>::max())
    throw ParseError(0, "RR collection dump header out of range");
  std::vector<std::uint64_t> offsets(theta + 1);
  for (auto& off : offsets) off = get_u64(in);
  std::vector<NodeId> roots(theta);
  for (auto& r : roots) r = static_cast<NodeId>(get_u64(in));
  std::vector<NodeId> members(offsets.back());
  for (auto& m : members) m = static_cast<NodeId>(get_u64(in));

  RRCollection c;
  c.num_nodes_ = static_cast<NodeId>(n);
  c.index_.resize(n);
  c.marginal_.assign(n, 0);
  c.committed_.assign(n, 0);
  for (std::uint64_t i = 0; i < theta; ++i) {
    if (offsets[i] > offsets[i + 1] || offsets[i + 1] > members.size())
      throw ParseError(0, "RR collection dump offsets corrupt");
    std::span<const NodeId> set(members.data() + offsets[i], members.data() + offsets[i + 1]);
    for (NodeId v : set)
      if (v >= n) throw ParseError(0, "RR collection dump member out of range");
    c.append(roots[i], set);
  }
  return c;
}

}  // namespace cim
