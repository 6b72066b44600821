#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cim/diffusion.hpp"
#include "cim/graph.hpp"
#include "cim/instance.hpp"

namespace cim::bench {

/// Two-proportion z statistic (treatment minus control).
double z_score(std::uint64_t engaged_t, std::uint64_t pop_t, std::uint64_t engaged_c,
               std::uint64_t pop_c);

/// Names accepted in ExperimentConfig::algorithms.
const std::vector<std::string>& registered_algorithms();

struct ExperimentConfig {
  std::string graph_path;
  std::string graph_label;  // defaults to the file stem
  LoadOptions load;
  Model model = Model::ic;
  std::string ap_file;               // when set, ap_fractions is ignored
  std::vector<double> ap_fractions;  // d / n
  std::vector<std::size_t> ks{10};
  std::vector<std::string> algorithms{"rr-opim-plus"};
  double epsilon = 0.1;
  double delta = 0.0;  // <= 0: 1 / n
  std::uint64_t trials = 10000;
  std::uint64_t local_rr_sets = 100000;
  unsigned repetitions = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double timeout_seconds = 0.0;  // per algorithm cell; 0 = none
  bool timing = true;            // false writes ms = 0 for byte-stable output
  std::string bounds_path;       // JSON lines of OPIM bound reports
};

struct ResultRecord {
  std::string graph;
  std::string algo;
  std::size_t k = 0;
  std::size_t d = 0;
  unsigned rep = 0;
  double spread = 0;
  double std_error = 0;
  std::size_t seeds = 0;
  double ms = 0;
  std::optional<double> ratio;
  bool operator==(const ResultRecord&) const = default;
};

inline constexpr const char* kCsvHeader = "graph,algo,k,d,rep,spread,stderr,seeds,ms,ratio";

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_csv(std::istream& in);

struct SelectOutcome {
  std::vector<ResultRecord> records;
  std::vector<std::string> timed_out;  // algorithm names skipped after a timeout
  std::string manifest;                // JSON run manifest
};

/// Runs every (d, k, repetition, algorithm) cell: samples APs from the
/// repetition's substream, selects, then scores the distinct seeds with
/// mc_spread. Throws ValidationError for an unknown algorithm.
SelectOutcome run_select(const ExperimentConfig& config);

/// Runs one registered algorithm on an instance. `seed` drives every random
/// choice the algorithm makes. Optional outputs: OPIM ratio and bound report.
struct AlgorithmRun {
  SeedAssignment assignment;
  std::optional<double> ratio;
  std::string bounds_jsonl;
};
AlgorithmRun run_algorithm(const std::string& name, const Instance& inst, Model model,
                           const ExperimentConfig& config, std::uint64_t seed,
                           const std::function<void()>& checkpoint = {});

/// Matroid check against the instance, then Monte-Carlo spread of the
/// distinct seeds.
SpreadEstimate evaluate_assignment(const Instance& inst, const SeedAssignment& s, Model model,
                                   std::uint64_t trials, std::uint64_t seed, unsigned workers);

}  // namespace cim::bench
