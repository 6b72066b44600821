#include "cim/opim.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <ostream>

#include "cim/errors.hpp"

namespace cim {

OpimVariant parse_opim_variant(const std::string& name) {
  if (name == "rr-opim-plus" || name == "rr-opim+") return OpimVariant::rr_opim_plus;
  if (name == "rr-opim") return OpimVariant::rr_opim;
  if (name == "mg-opim") return OpimVariant::mg_opim;
  throw ValidationError("unknown OPIM variant '" + name + "'");
}

const char* to_string(OpimVariant v) noexcept {
  switch (v) {
    case OpimVariant::rr_opim_plus: return "rr-opim-plus";
    case OpimVariant::rr_opim: return "rr-opim";
    case OpimVariant::mg_opim: return "mg-opim";
  }
  return "?";
}

const char* to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::early: return "early";
    case StopReason::exhausted: return "exhausted";
    case StopReason::empty: return "empty";
    case StopReason::budget: return "budget";
  }
  return "?";
}

FeasibleDraw random_feasible_assignment(const Instance& inst, Rng& rng) {
  FeasibleDraw draw;
  draw.assignment = SeedAssignment(inst.num_aps());
  std::vector<NodeId> order(inst.candidate_nodes().begin(), inst.candidate_nodes().end());
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<std::uint32_t> open;
  for (NodeId v : order) {
    open.clear();
    for (auto ap : inst.ap_friends(v))
      if (draw.assignment.per_ap[ap].size() < inst.k()) open.push_back(ap);
    if (open.empty()) continue;
    draw.assignment.per_ap[open[rng.below(open.size())]].push_back(v);
    ++draw.chi;
  }
  return draw;
}

std::optional<SampleSizes> theta_max(const Instance& inst, double epsilon, double delta,
                                     std::uint64_t chi) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("epsilon must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (chi == 0) return std::nullopt;

  SampleSizes s;
  for (std::size_t a = 0; a < inst.num_aps(); ++a) {
    const auto n = static_cast<long double>(inst.candidates(a).size());
    const auto r = static_cast<long double>(std::min(inst.k(), inst.candidates(a).size()));
    s.log_combinations += std::lgamma(n + 1) - std::lgamma(r + 1) - std::lgamma(n - r + 1);
  }
  const long double n_p = inst.pp_graph().num_nodes();
  const long double eps = epsilon;
  const long double log6 = std::log(6.0L / delta);
  const long double root = 0.5L * std::sqrt(log6) + std::sqrt(0.5L * (s.log_combinations + log6));
  // theta_max / theta = n_p / eps^2 exactly, so theta depends on n_p only through i_max.
  const long double per_chi = 2.0L * root * root / static_cast<long double>(chi);
  s.theta_max_exact = per_chi * n_p / (eps * eps);
  s.theta_max = static_cast<std::uint64_t>(std::ceil(s.theta_max_exact));
  s.theta = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(per_chi)));
  const long double ratio = n_p / (eps * eps);
  s.i_max = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::log2(ratio))));
  return s;
}

namespace {

void check_pf(double p_f) {
  if (!(p_f > 0.0 && p_f < 1.0)) throw ValidationError("p_f must lie in (0, 1)");
}

}  // namespace

double sigma_upper(double coverage_upper, std::uint64_t theta1, std::uint64_t n_p, double p_f) {
  check_pf(p_f);
  if (theta1 == 0) throw ValidationError("theta1 must be positive");
  const double half_log = std::log(1.0 / p_f) / 2.0;
  const double root = std::sqrt(coverage_upper + half_log) + std::sqrt(half_log);
  return root * root * static_cast<double>(n_p) / static_cast<double>(theta1);
}

double sigma_lower(double coverage, std::uint64_t theta2, std::uint64_t n_p, double p_f) {
  check_pf(p_f);
  if (theta2 == 0) throw ValidationError("theta2 must be positive");
  const double log_inv = std::log(1.0 / p_f);
  const double root = std::sqrt(coverage + 2.0 * log_inv / 9.0) - std::sqrt(log_inv / 2.0);
  const double value = (root * root - log_inv / 18.0) * static_cast<double>(n_p) /
                       static_cast<double>(theta2);
  // (sqrt(2L/9) - sqrt(L/2))^2 == L/18 algebraically; keep zero coverage exact.
  if (coverage <= 0.0) return 0.0;
  return std::max(0.0, value);
}

std::uint64_t tightened_coverage_upper(const RRCollection& coll, std::span<const Selection> trace,
                                       const Instance& inst, std::size_t k) {
  const std::size_t d = inst.num_aps();
  std::vector<std::vector<NodeId>> picks(d);
  std::vector<NodeId> final_seeds;
  for (const Selection& s : trace) {
    if (s.ap >= d) throw std::logic_error("greedy trace names an unknown AP");
    auto cands = inst.candidates(s.ap);
    if (!std::binary_search(cands.begin(), cands.end(), s.node) || s.node >= coll.num_nodes())
      throw std::logic_error("greedy trace is inconsistent with the instance");
    picks[s.ap].push_back(s.node);
    final_seeds.push_back(s.node);
  }
  std::uint64_t best = 2 * coll.coverage(final_seeds);

  std::vector<char> covered(coll.size(), 0);
  std::uint64_t covered_count = 0;
  auto add = [&](NodeId v) {
    for (auto id : coll.sets_containing(v))
      if (!covered[id]) {
        covered[id] = 1;
        ++covered_count;
      }
  };
  std::vector<std::uint64_t> gain(coll.num_nodes(), 0);
  std::vector<std::uint64_t> top;
  for (std::size_t t = 0; t < k; ++t) {
    if (t > 0)
      for (std::size_t a = 0; a < d; ++a)
        if (t - 1 < picks[a].size()) add(picks[a][t - 1]);
    for (NodeId v : inst.candidate_nodes()) {
      std::uint64_t g = 0;
      for (auto id : coll.sets_containing(v)) g += covered[id] ? 0 : 1;
      gain[v] = g;
    }
    std::uint64_t phi = covered_count;
    for (std::size_t a = 0; a < d; ++a) {
      auto cands = inst.candidates(a);
      top.clear();
      for (NodeId v : cands) top.push_back(gain[v]);
      const std::size_t keep = std::min(k, top.size());
      std::partial_sort(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(keep), top.end(),
                        std::greater<>());
      for (std::size_t i = 0; i < keep; ++i) phi += top[i];
    }
    best = std::min(best, phi);
  }
  return best;
}

OpimResult run_opim(const Instance& inst, Model model, const OpimParams& params) {
  OpimResult out;
  out.assignment = SeedAssignment(inst.num_aps());
  BoundReport& rep = out.report;
  rep.epsilon = params.epsilon;
  rep.delta = params.delta > 0 ? params.delta : 1.0 / std::max<double>(2, inst.graph().num_nodes());
  if (!(params.epsilon > 0.0 && params.epsilon < 0.5))
    throw ValidationError("epsilon must lie in (0, 1/2)");

  Rng chi_rng(substream(params.seed, kChiStream));
  for (unsigned draw = 0; draw < std::max(1u, params.chi_draws); ++draw)
    rep.chi = std::max(rep.chi, random_feasible_assignment(inst, chi_rng).chi);
  const auto sizes = theta_max(inst, params.epsilon, rep.delta, rep.chi);
  if (!sizes) {
    rep.stop = StopReason::empty;
    return out;
  }
  rep.sizes = *sizes;
  rep.p_f = rep.delta / (3.0 * static_cast<double>(sizes->i_max));

  const Graph& p = inst.pp_graph();
  const std::uint64_t n_p = p.num_nodes();
  rep.r1_stream = substream(params.seed, kR1Stream);
  rep.r2_stream = substream(params.seed, kR2Stream);
  RRCollection r1(p, model, rep.r1_stream);
  RRCollection r2(p, model, rep.r2_stream);
  r1.set_byte_budget(params.byte_budget);
  r2.set_byte_budget(params.byte_budget);

  auto grow = [&](std::uint64_t count) -> bool {
    if (params.max_rr_sets && r1.size() + r2.size() + 2 * count > params.max_rr_sets) return false;
    try {
      r1.extend(count, params.workers);
      r2.extend(count, params.workers);
    } catch (const BudgetError&) {
      return false;
    }
    return true;
  };

  if (!grow(sizes->theta)) {
    rep.stop = StopReason::budget;
    rep.total_rr_sets = r1.size() + r2.size();
    return out;
  }

  CoverageOracle oracle(r1);
  GreedyOptions gopts;
  gopts.checkpoint = params.checkpoint;
  for (std::uint64_t i = 1; i <= sizes->i_max; ++i) {
    if (params.checkpoint) params.checkpoint();
    GreedyResult greedy = params.variant == OpimVariant::mg_opim ? mg_greedy(inst, oracle, gopts)
                                                                 : rr_greedy(inst, oracle, gopts);
    const auto seeds = greedy.assignment.distinct_seeds();

    IterationRecord rec;
    rec.iteration = i;
    rec.theta1 = r1.size();
    rec.theta2 = r2.size();
    rec.coverage1 = r1.coverage(seeds);
    rec.coverage_upper = params.variant == OpimVariant::rr_opim_plus
                             ? tightened_coverage_upper(r1, greedy.trace, inst, inst.k())
                             : 2 * rec.coverage1;
    rec.coverage2 = r2.coverage(seeds);
    rec.sigma_upper = sigma_upper(static_cast<double>(rec.coverage_upper), rec.theta1, n_p, rep.p_f);
    rec.sigma_lower = sigma_lower(static_cast<double>(rec.coverage2), rec.theta2, n_p, rep.p_f);
    rec.ratio = rec.sigma_upper > 0 ? rec.sigma_lower / rec.sigma_upper : 0.0;
    rep.iterations.push_back(rec);
    out.assignment = std::move(greedy.assignment);
    out.trace = std::move(greedy.trace);

    if (rec.ratio >= 0.5 - params.epsilon) {
      rep.stop = StopReason::early;
      rep.guaranteed = true;
      break;
    }
    if (i == sizes->i_max) {
      rep.stop = StopReason::exhausted;
      rep.guaranteed = true;
      break;
    }
    if (!grow(r1.size())) {
      rep.stop = StopReason::budget;
      break;
    }
  }
  rep.total_rr_sets = r1.size() + r2.size();
  return out;
}

void write_bound_report_jsonl(std::ostream& out, const BoundReport& report,
                              const std::string& label) {
  for (const auto& it : report.iterations) {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["iteration"] = it.iteration;
    j["theta1"] = it.theta1;
    j["theta2"] = it.theta2;
    j["coverage1"] = it.coverage1;
    j["coverage_upper"] = it.coverage_upper;
    j["coverage2"] = it.coverage2;
    j["sigma_upper"] = it.sigma_upper;
    j["sigma_lower"] = it.sigma_lower;
    j["ratio"] = it.ratio;
    j["chi"] = report.chi;
    j["theta_max"] = report.sizes.theta_max;
    j["i_max"] = report.sizes.i_max;
    j["p_f"] = report.p_f;
    j["final"] = &it == &report.iterations.back();
    j["stop"] = to_string(report.stop);
    out << j.dump() << '\n';
  }
}

}  // namespace cim
