#include "cim/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "cim/errors.hpp"
#include "cim/opim.hpp"
#include "cim/random.hpp"
#include "cim/rr_collection.hpp"
#include "cim/selectors.hpp"
#include "json.hpp"

namespace cim::bench {

double z_score(std::uint64_t engaged_t, std::uint64_t pop_t, std::uint64_t engaged_c,
               std::uint64_t pop_c) {
  if (pop_t == 0 || pop_c == 0) throw ValidationError("population must be positive");
  if (engaged_t > pop_t || engaged_c > pop_c)
    throw ValidationError("engaged count exceeds population");
  const double nt = static_cast<double>(pop_t);
  const double nc = static_cast<double>(pop_c);
  const double pt = static_cast<double>(engaged_t) / nt;
  const double pc = static_cast<double>(engaged_c) / nc;
  const double diff = pt - pc;
  if (diff == 0.0) return 0.0;
  const double var = pt * (1 - pt) / nt + pc * (1 - pc) / nc;
  if (var <= 0.0) throw ValidationError("z statistic undefined for degenerate proportions");
  return diff / std::sqrt(var);
}

const std::vector<std::string>& registered_algorithms() {
  static const std::vector<std::string> names{
      "degree",    "degree-g",  "pagerank", "pagerank-g", "local-rr",
      "mg-greedy", "rr-greedy", "rr-opim-plus", "rr-opim", "mg-opim"};
  return names;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_field(const std::string& s, std::size_t line, const char* name) {
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(line, std::string("bad ") + name + " field '" + s + "'");
  return value;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', '_');
  std::replace(s.begin(), s.end(), '\n', '_');
  return s;
}

void require_known(const std::string& name) {
  const auto& names = registered_algorithms();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ValidationError("unknown algorithm '" + name + "'");
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << sanitize(r.graph) << ',' << sanitize(r.algo) << ',' << r.k << ',' << r.d << ','
        << r.rep << ',' << format_double(r.spread) << ',' << format_double(r.std_error) << ','
        << r.seeds << ',' << format_double(r.ms) << ',';
    if (r.ratio) out << format_double(*r.ratio);
    out << '\n';
  }
}

std::vector<ResultRecord> read_csv(std::istream& in) {
  std::vector<ResultRecord> records;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError(1, "unexpected CSV header '" + line + "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 10) throw ParseError(line_no, "expected 10 fields");
    ResultRecord r;
    r.graph = f[0];
    r.algo = f[1];
    r.k = parse_field<std::size_t>(f[2], line_no, "k");
    r.d = parse_field<std::size_t>(f[3], line_no, "d");
    r.rep = parse_field<unsigned>(f[4], line_no, "rep");
    r.spread = parse_field<double>(f[5], line_no, "spread");
    r.std_error = parse_field<double>(f[6], line_no, "stderr");
    r.seeds = parse_field<std::size_t>(f[7], line_no, "seeds");
    r.ms = parse_field<double>(f[8], line_no, "ms");
    if (!f[9].empty()) r.ratio = parse_field<double>(f[9], line_no, "ratio");
    records.push_back(std::move(r));
  }
  return records;
}

AlgorithmRun run_algorithm(const std::string& name, const Instance& inst, Model model,
                           const ExperimentConfig& config, std::uint64_t seed,
                           const std::function<void()>& checkpoint) {
  require_known(name);
  AlgorithmRun run;
  const Graph& p = inst.pp_graph();

  if (name == "degree" || name == "degree-g" || name == "pagerank" || name == "pagerank-g") {
    LocalOptions opts;
    opts.on_full_graph = name.ends_with("-g");
    run.assignment = local_topk(
        inst, name.starts_with("degree") ? LocalScore::degree : LocalScore::pagerank, opts);
    return run;
  }
  if (name == "local-rr") {
    RRCollection coll(p, model, seed);
    coll.extend(config.local_rr_sets, config.workers);
    if (checkpoint) checkpoint();
    LocalOptions opts;
    opts.rr = &coll;
    run.assignment = local_topk(inst, LocalScore::local_rr_greedy, opts);
    return run;
  }
  if (name == "mg-greedy" || name == "rr-greedy") {
    MonteCarloOracle oracle(p, model, config.trials, seed);
    GreedyOptions opts;
    opts.checkpoint = checkpoint;
    run.assignment = name == "mg-greedy" ? mg_greedy(inst, oracle, opts).assignment
                                         : rr_greedy(inst, oracle, opts).assignment;
    return run;
  }

  OpimParams params;
  params.epsilon = config.epsilon;
  params.delta = config.delta;
  params.variant = parse_opim_variant(name);
  params.seed = seed;
  params.workers = config.workers;
  params.checkpoint = checkpoint;
  OpimResult res = run_opim(inst, model, params);
  run.assignment = std::move(res.assignment);
  if (!res.report.iterations.empty()) run.ratio = res.report.iterations.back().ratio;
  std::ostringstream bounds;
  write_bound_report_jsonl(bounds, res.report, name);
  run.bounds_jsonl = bounds.str();
  return run;
}

SpreadEstimate evaluate_assignment(const Instance& inst, const SeedAssignment& s, Model model,
                                   std::uint64_t trials, std::uint64_t seed, unsigned workers) {
  check_feasible(inst, s);
  const auto seeds = s.distinct_seeds();
  if (seeds.empty()) return SpreadEstimate{0.0, trials, 0.0};
  return mc_spread(inst.pp_graph(), model, seeds, trials, seed, workers);
}

SelectOutcome run_select(const ExperimentConfig& config) {
  for (const auto& a : config.algorithms) require_known(a);
  if (config.algorithms.empty()) throw ValidationError("no algorithms given");
  if (config.repetitions < 1) throw ValidationError("repetitions must be at least 1");
  if (config.ks.empty()) throw ValidationError("no k values given");
  if (config.ap_file.empty() && config.ap_fractions.empty())
    throw ValidationError("either an AP file or AP fractions are required");
  for (double f : config.ap_fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("AP fraction must lie in [0, 1]");

  auto graph = std::make_shared<const Graph>(load_graph(config.graph_path, config.load));
  if (config.model == Model::lt) graph->require_lt();
  const std::string label = config.graph_label.empty()
                                ? std::filesystem::path(config.graph_path).stem().string()
                                : config.graph_label;

  std::vector<NodeId> file_aps;
  if (!config.ap_file.empty()) file_aps = read_ap_file(config.ap_file, *graph);
  const std::vector<double> fractions =
      config.ap_file.empty() ? config.ap_fractions : std::vector<double>{-1.0};

  SelectOutcome outcome;
  std::set<std::string> skipped;
  std::ostringstream bounds;

  nlohmann::ordered_json manifest;
  manifest["graph"] = config.graph_path;
  manifest["label"] = label;
  manifest["nodes"] = graph->num_nodes();
  manifest["edges"] = graph->num_edges();
  manifest["model"] = to_string(config.model);
  manifest["seed"] = config.seed;
  manifest["epsilon"] = config.epsilon;
  manifest["delta"] = config.delta;
  manifest["trials"] = config.trials;
  manifest["local_rr_sets"] = config.local_rr_sets;
  manifest["repetitions"] = config.repetitions;
  manifest["ks"] = config.ks;
  manifest["algorithms"] = config.algorithms;
  if (config.ap_file.empty())
    manifest["ap_fractions"] = config.ap_fractions;
  else
    manifest["ap_file"] = config.ap_file;
  manifest["streams"] = nlohmann::ordered_json::array();

  for (double fraction : fractions) {
    for (std::size_t k : config.ks) {
      for (unsigned rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t rep_seed = substream(config.seed, rep);
        const std::uint64_t ap_seed = substream(rep_seed, 1);
        const std::uint64_t select_seed = substream(rep_seed, 2);
        const std::uint64_t eval_seed = substream(rep_seed, 3);
        std::vector<NodeId> aps;
        if (fraction < 0)
          aps = file_aps;
        else if (fraction > 0)
          aps = select_random_aps(*graph, fraction, ap_seed);
        const Instance inst = build_instance(graph, aps, k);
        if (k == config.ks.front())
          manifest["streams"].push_back({{"fraction", fraction < 0 ? 0.0 : fraction},
                                         {"rep", rep},
                                         {"rep_seed", rep_seed},
                                         {"ap_seed", ap_seed},
                                         {"select_seed", select_seed},
                                         {"eval_seed", eval_seed}});

        for (const auto& algo : config.algorithms) {
          if (skipped.count(algo)) continue;
          using clock = std::chrono::steady_clock;
          const auto start = clock::now();
          std::function<void()> checkpoint;
          if (config.timeout_seconds > 0) {
            const auto deadline =
                start + std::chrono::duration_cast<clock::duration>(
                            std::chrono::duration<double>(config.timeout_seconds));
            checkpoint = [deadline] {
              if (clock::now() > deadline) throw Cancelled("wall-clock budget exceeded");
            };
          }
          AlgorithmRun run;
          try {
            run = run_algorithm(algo, inst, config.model, config, select_seed, checkpoint);
            if (checkpoint) checkpoint();
          } catch (const Cancelled&) {
            skipped.insert(algo);
            outcome.timed_out.push_back(algo);
            continue;
          }
          const double ms =
              std::chrono::duration<double, std::milli>(clock::now() - start).count();
          const auto est = evaluate_assignment(inst, run.assignment, config.model, config.trials,
                                               eval_seed, config.workers);
          ResultRecord r;
          r.graph = label;
          r.algo = algo;
          r.k = k;
          r.d = inst.num_aps();
          r.rep = rep;
          r.spread = est.mean;
          r.std_error = est.std_error;
          r.seeds = run.assignment.distinct_seeds().size();
          r.ms = config.timing ? ms : 0.0;
          r.ratio = run.ratio;
          outcome.records.push_back(std::move(r));
          bounds << run.bounds_jsonl;
        }
      }
    }
  }

  manifest["timed_out"] = outcome.timed_out;
  outcome.manifest = manifest.dump(2);
  if (!config.bounds_path.empty()) {
    std::ofstream out(config.bounds_path);
    if (!out) throw std::runtime_error("cannot write " + config.bounds_path);
    out << bounds.str();
  }
  return outcome;
}

}  // namespace cim::bench
