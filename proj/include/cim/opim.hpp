#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cim/diffusion.hpp"
#include "cim/instance.hpp"
#include "cim/random.hpp"
#include "cim/rr_collection.hpp"
#include "cim/selectors.hpp"

namespace cim {

enum class OpimVariant {
  rr_opim_plus,  // round-robin greedy, tightened upper bound
  rr_opim,       // round-robin greedy, 2 * coverage upper bound
  mg_opim,       // max-gain greedy, 2 * coverage upper bound
};

OpimVariant parse_opim_variant(const std::string& name);
const char* to_string(OpimVariant v) noexcept;

struct OpimParams {
  double epsilon = 0.1;
  /// Failure probability; <= 0 means 1 / |V|.
  double delta = 0.0;
  OpimVariant variant = OpimVariant::rr_opim_plus;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  /// Caps on total RR sets across both collections and on stored bytes per
  /// collection (0 = unlimited). Hitting either ends the run unguaranteed.
  std::uint64_t max_rr_sets = 0;
  std::uint64_t byte_budget = 0;
  /// Random feasible assignments drawn for chi; the largest is kept.
  unsigned chi_draws = 1;
  std::function<void()> checkpoint;
};

/// Substream ids under OpimParams::seed.
inline constexpr std::uint64_t kChiStream = 0;
inline constexpr std::uint64_t kR1Stream = 1;
inline constexpr std::uint64_t kR2Stream = 2;

struct FeasibleDraw {
  SeedAssignment assignment;
  std::uint64_t chi = 0;  // distinct seeds
};

/// Visits the distinct candidate PPs in random order and hands each to a
/// uniformly random AP friend that still has capacity.
FeasibleDraw random_feasible_assignment(const Instance& inst, Rng& rng);

struct SampleSizes {
  long double log_combinations = 0;  // ln prod_u C(|C_u|, min(k, |C_u|))
  long double theta_max_exact = 0;   // before rounding
  std::uint64_t theta_max = 0;
  std::uint64_t theta = 0;  // initial per-collection size
  std::uint64_t i_max = 0;
};

/// Worst-case and initial RR-set counts plus the doubling limit. Returns
/// nullopt for an empty problem (chi = 0).
std::optional<SampleSizes> theta_max(const Instance& inst, double epsilon, double delta,
                                     std::uint64_t chi);

/// Concentration upper bound on the optimal spread from a coverage upper bound
/// measured on theta1 RR sets.
double sigma_upper(double coverage_upper, std::uint64_t theta1, std::uint64_t n_p, double p_f);

/// Concentration lower bound on the spread of S from its coverage on theta2
/// independent RR sets. Clamped at 0.
double sigma_lower(double coverage, std::uint64_t theta2, std::uint64_t n_p, double p_f);

/// min{2 * Lambda(S), min over 0 <= t < k of Lambda(S^t) + sum over APs of the
/// k largest marginal coverages in C_u w.r.t. S^t}, where S^t keeps the first
/// min(t, |S_u|) selections of every AP from the greedy trace. Independent of
/// the collection's greedy state.
std::uint64_t tightened_coverage_upper(const RRCollection& coll, std::span<const Selection> trace,
                                       const Instance& inst, std::size_t k);

enum class StopReason { early, exhausted, empty, budget };
const char* to_string(StopReason r) noexcept;

struct IterationRecord {
  std::uint64_t iteration = 0;
  std::uint64_t theta1 = 0;
  std::uint64_t theta2 = 0;
  std::uint64_t coverage1 = 0;       // Lambda_R1(S)
  std::uint64_t coverage_upper = 0;  // bound on Lambda_R1(S*)
  std::uint64_t coverage2 = 0;       // Lambda_R2(S)
  double sigma_upper = 0;
  double sigma_lower = 0;
  double ratio = 0;
};

struct BoundReport {
  std::vector<IterationRecord> iterations;
  StopReason stop = StopReason::empty;
  bool guaranteed = false;
  std::uint64_t chi = 0;
  SampleSizes sizes;
  double p_f = 0;
  double epsilon = 0;
  double delta = 0;
  std::uint64_t total_rr_sets = 0;
  std::uint64_t r1_stream = 0;
  std::uint64_t r2_stream = 0;
};

struct OpimResult {
  SeedAssignment assignment;
  std::vector<Selection> trace;
  BoundReport report;
};

OpimResult run_opim(const Instance& inst, Model model, const OpimParams& params);

/// One JSON object per iteration, tagged with `label`.
void write_bound_report_jsonl(std::ostream& out, const BoundReport& report,
                              const std::string& label);

}  // namespace cim
