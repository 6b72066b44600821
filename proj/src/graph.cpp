#include "cim/graph.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string_view>

#include "cim/errors.hpp"

namespace cim {

namespace {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 8))
    throw ParseError(0, "binary cache truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

constexpr std::string_view kGraphMagic = "CIMG1";

}  // namespace

Graph::Graph(NodeId n, std::vector<Edge> edges, std::vector<ExternalId> external) : n_(n) {
  if (external.empty()) {
    external.resize(n);
    std::iota(external.begin(), external.end(), ExternalId{0});
  }
  if (external.size() != n) throw ValidationError("external id table size differs from node count");
  external_ = std::move(external);
  lookup_.reserve(n);
  for (NodeId v = 0; v < n; ++v) lookup_.emplace(external_[v], v);

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  for (const Edge& e : edges) {
    if (e.src >= n || e.dst >= n) throw ValidationError("edge endpoint out of range");
    if (!(e.value >= 0.0 && e.value <= 1.0))
      throw ValidationError("edge value " + format_double(e.value) + " outside [0,1]");
  }

  out_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  in_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Edge& e : edges) {
    ++out_offsets_[e.src + 1];
    ++in_offsets_[e.dst + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  out_targets_.resize(edges.size());
  out_values_.resize(edges.size());
  in_sources_.resize(edges.size());
  in_values_.resize(edges.size());
  std::vector<std::uint64_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    out_targets_[i] = e.dst;
    out_values_[i] = e.value;
    const auto slot = in_fill[e.dst]++;
    in_sources_[slot] = e.src;
    in_values_[slot] = e.value;
  }

  in_weight_sum_.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    double sum = 0.0;
    for (double w : in_values(v)) sum += w;
    in_weight_sum_[v] = sum;
    if (sum > 1.0 + kLtSlack) lt_ok_ = false;
  }
}

void Graph::require_lt() const {
  if (lt_ok_) return;
  for (NodeId v = 0; v < n_; ++v) {
    if (in_weight_sum_[v] > 1.0 + kLtSlack)
      throw ValidationError("LT weight sum " + format_double(in_weight_sum_[v]) +
                            " exceeds 1 at node " + std::to_string(external_[v]));
  }
}

NodeId Graph::find(ExternalId id) const noexcept {
  auto it = lookup_.find(id);
  return it == lookup_.end() ? kNoNode : it->second;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < n_; ++u) {
    auto targets = out_neighbors(u);
    auto values = out_values(u);
    for (std::size_t i = 0; i < targets.size(); ++i) out.push_back({u, targets[i], values[i]});
  }
  return out;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.n_ == b.n_ && a.external_ == b.external_ && a.out_offsets_ == b.out_offsets_ &&
         a.out_targets_ == b.out_targets_ && a.out_values_ == b.out_values_;
}

Graph load_edge_list(std::istream& in, const LoadOptions& opts, LoadStats* stats) {
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  st = {};

  // (src, dst) -> value; std::map keeps the last occurrence and a stable order.
  std::map<std::pair<ExternalId, ExternalId>, double> unique;
  std::vector<ExternalId> ids;
  std::optional<ExternalId> declared_n;

  auto add = [&](ExternalId s, ExternalId d, double value) {
    if (s == d) {
      ++st.self_loops;
      return;
    }
    ids.push_back(s);
    ids.push_back(d);
    auto [it, inserted] = unique.try_emplace({s, d}, value);
    if (!inserted) {
      ++st.duplicates;
      it->second = value;
    }
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = trim(line);
    if (text.empty() || text.front() == '#' || text.front() == '%') continue;
    if (text.starts_with("n=")) {
      ExternalId n = 0;
      if (!parse_number(trim(text.substr(2)), n)) throw ParseError(lineno, "bad node-count header");
      declared_n = n;
      continue;
    }
    ++st.lines;
    auto tok = split_ws(text);
    if (tok.size() < 2 || tok.size() > 3) throw ParseError(lineno, "expected 'src dst [value]'");
    ExternalId s = 0, d = 0;
    if (!parse_number(tok[0], s) || !parse_number(tok[1], d))
      throw ParseError(lineno, "node ids must be non-negative integers");
    double value = 0.0;
    if (opts.mode == WeightMode::explicit_values) {
      if (tok.size() < 3) throw ParseError(lineno, "missing edge value in explicit mode");
      if (!parse_number(tok[2], value)) throw ParseError(lineno, "bad edge value");
      if (!(value >= 0.0 && value <= 1.0))
        throw ValidationError("line " + std::to_string(lineno) + ": edge value " +
                              std::string(tok[2]) + " outside [0,1]");
    } else if (opts.mode == WeightMode::uniform_ic) {
      value = opts.uniform_p;
    }
    add(s, d, value);
    if (opts.undirected) add(d, s, value);
  }
  if (opts.mode == WeightMode::uniform_ic && !(opts.uniform_p >= 0.0 && opts.uniform_p <= 1.0))
    throw ValidationError("uniform probability outside [0,1]");

  if (declared_n)
    for (ExternalId v = 0; v < *declared_n; ++v) ids.push_back(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() >= kNoNode) throw ValidationError("too many nodes");

  std::unordered_map<ExternalId, NodeId> dense;
  dense.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) dense.emplace(ids[i], static_cast<NodeId>(i));

  std::vector<Edge> edges;
  edges.reserve(unique.size());
  std::vector<std::size_t> indeg(ids.size(), 0);
  for (const auto& [key, value] : unique) {
    const Edge e{dense[key.first], dense[key.second], value};
    ++indeg[e.dst];
    edges.push_back(e);
  }
  if (opts.mode == WeightMode::weighted_cascade_ic || opts.mode == WeightMode::weighted_cascade_lt)
    for (Edge& e : edges) e.value = 1.0 / static_cast<double>(indeg[e.dst]);

  const auto n = static_cast<NodeId>(ids.size());
  Graph g(n, std::move(edges), std::move(ids));
  if (opts.check_lt || opts.mode == WeightMode::weighted_cascade_lt) g.require_lt();
  return g;
}

Graph load_edge_list(const std::filesystem::path& path, const LoadOptions& opts, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_edge_list(in, opts, stats);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  // Dense ids follow ascending external id, so the ids 0..prefix-1 come first.
  NodeId prefix = 0;
  while (prefix < g.num_nodes() && g.external_id(prefix) == prefix) ++prefix;
  if (prefix > 0) out << "n=" << prefix << '\n';
  for (const Edge& e : g.edges())
    out << g.external_id(e.src) << ' ' << g.external_id(e.dst) << ' ' << format_double(e.value)
        << '\n';
}

void write_binary_cache(std::ostream& out, const Graph& g) {
  out.write(kGraphMagic.data(), static_cast<std::streamsize>(kGraphMagic.size()));
  put_u64(out, g.num_nodes());
  put_u64(out, g.num_edges());
  for (ExternalId id : g.external_ids()) put_u64(out, id);
  for (std::uint64_t off : g.raw_out_offsets()) put_u64(out, off);
  for (NodeId t : g.raw_out_targets()) put_u64(out, t);
  for (double v : g.raw_out_values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

Graph read_binary_cache(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), 5) || std::string_view(magic.data(), 5) != kGraphMagic)
    throw ParseError(0, "not a CIMG1 binary cache");
  const std::uint64_t n = get_u64(in);
  const std::uint64_t m = get_u64(in);
  if (n >= kNoNode) throw ParseError(0, "binary cache node count too large");
  std::vector<ExternalId> external(n);
  for (auto& id : external) id = get_u64(in);
  std::vector<std::uint64_t> offsets(n + 1);
  for (auto& off : offsets) off = get_u64(in);
  if (offsets.front() != 0 || offsets.back() != m) throw ParseError(0, "binary cache offsets corrupt");
  std::vector<Edge> edges(m);
  for (auto& e : edges) e.dst = static_cast<NodeId>(get_u64(in));
  for (auto& e : edges) e.value = std::bit_cast<double>(get_u64(in));
  for (std::uint64_t u = 0; u < n; ++u) {
    if (offsets[u] > offsets[u + 1]) throw ParseError(0, "binary cache offsets corrupt");
    for (auto i = offsets[u]; i < offsets[u + 1]; ++i) edges[i].src = static_cast<NodeId>(u);
  }
  return Graph(static_cast<NodeId>(n), std::move(edges), std::move(external));
}

bool is_binary_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, 5> magic{};
  return in.read(magic.data(), 5) && std::string_view(magic.data(), 5) == kGraphMagic;
}

Graph load_graph(const std::filesystem::path& path, const LoadOptions& opts, LoadStats* stats) {
  if (is_binary_cache(path)) {
    std::ifstream in(path, std::ios::binary);
    Graph g = read_binary_cache(in);
    if (opts.check_lt || opts.mode == WeightMode::weighted_cascade_lt) g.require_lt();
    return g;
  }
  return load_edge_list(path, opts, stats);
}

WeightMode parse_weight_mode(const std::string& name) {
  if (name == "explicit") return WeightMode::explicit_values;
  if (name == "wc" || name == "wc-ic" || name == "weighted-cascade-ic")
    return WeightMode::weighted_cascade_ic;
  if (name == "uniform" || name == "uniform-ic") return WeightMode::uniform_ic;
  if (name == "wc-lt" || name == "weighted-cascade-lt") return WeightMode::weighted_cascade_lt;
  throw ValidationError("unknown weight mode '" + name + "'");
}

}  // namespace cim
