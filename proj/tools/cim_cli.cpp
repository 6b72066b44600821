#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cim/bench.hpp"
#include "cim/errors.hpp"
#include "cim/exact_oracle.hpp"
#include "cim/graph.hpp"
#include "cim/instance.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kBudget = 4 };

struct GraphArgs {
  std::string path;
  std::string weights = "wc";
  bool undirected = false;
  double uniform_p = 0.1;
  std::string model = "ic";
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
  cmd->add_option("-g,--graph", g.path, "edge list or binary cache")->required();
  cmd->add_option("-w,--weights", g.weights, "explicit | wc | uniform | wc-lt")
      ->capture_default_str();
  cmd->add_flag("--undirected", g.undirected, "add both directions of every edge");
  cmd->add_option("--uniform-p", g.uniform_p, "edge probability for uniform weights")
      ->capture_default_str();
  cmd->add_option("-m,--model", g.model, "ic | lt")->capture_default_str();
}

cim::LoadOptions load_options(const GraphArgs& g) {
  cim::LoadOptions opts;
  opts.mode = cim::parse_weight_mode(g.weights);
  opts.undirected = g.undirected;
  opts.uniform_p = g.uniform_p;
  return opts;
}

std::shared_ptr<const cim::Graph> load(const GraphArgs& g, cim::Model model) {
  auto graph = std::make_shared<const cim::Graph>(cim::load_graph(g.path, load_options(g)));
  if (model == cim::Model::lt) graph->require_lt();
  return graph;
}

std::vector<cim::NodeId> aps_or_empty(const std::string& ap_file, const cim::Graph& g) {
  if (ap_file.empty()) return {};
  return cim::read_ap_file(ap_file, g);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity constrained influence maximization toolkit"};
  app.require_subcommand(1);

  // select
  GraphArgs sel_graph;
  cim::bench::ExperimentConfig cfg;
  cfg.ks.clear();
  cfg.algorithms.clear();
  std::string out_path, manifest_path;
  bool no_timing = false;
  auto* select = app.add_subcommand("select", "run seed selectors over a parameter sweep");
  add_graph_options(select, sel_graph);
  select->add_option("--label", cfg.graph_label, "graph name written to the CSV");
  select->add_option("--ap-file", cfg.ap_file, "external AP ids, one per line");
  select->add_option("--ap-fraction", cfg.ap_fractions, "d/n values for random AP samples");
  select->add_option("-k,--k", cfg.ks, "per-AP seed capacities")->required();
  select->add_option("-a,--algo", cfg.algorithms, "algorithms to run")->required();
  select->add_option("--epsilon", cfg.epsilon)->capture_default_str();
  select->add_option("--delta", cfg.delta, "failure probability (default 1/n)");
  select->add_option("-r,--trials", cfg.trials, "Monte-Carlo trials")->capture_default_str();
  select->add_option("--local-rr-sets", cfg.local_rr_sets)->capture_default_str();
  select->add_option("--reps", cfg.repetitions)->capture_default_str();
  select->add_option("-s,--seed", cfg.seed)->capture_default_str();
  select->add_option("-j,--workers", cfg.workers)->capture_default_str();
  select->add_option("--timeout", cfg.timeout_seconds, "seconds per algorithm run");
  select->add_flag("--no-timing", no_timing, "write ms = 0");
  select->add_option("--bounds", cfg.bounds_path, "OPIM bound reports (JSON lines)");
  select->add_option("-o,--out", out_path, "CSV output (default stdout)");
  select->add_option("--manifest", manifest_path, "run manifest JSON");

  // evaluate
  GraphArgs ev_graph;
  std::string ev_aps, ev_assignment;
  std::size_t ev_k = 1;
  std::uint64_t ev_trials = 10000, ev_seed = 0;
  unsigned ev_workers = 1;
  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo spread of a seed assignment");
  add_graph_options(evaluate, ev_graph);
  evaluate->add_option("--ap-file", ev_aps)->required();
  evaluate->add_option("--assignment", ev_assignment, "\"ap_id seed_id\" lines")->required();
  evaluate->add_option("-k,--k", ev_k)->capture_default_str();
  evaluate->add_option("-r,--trials", ev_trials)->capture_default_str();
  evaluate->add_option("-s,--seed", ev_seed)->capture_default_str();
  evaluate->add_option("-j,--workers", ev_workers)->capture_default_str();

  // oracle
  GraphArgs or_graph;
  std::string or_aps, or_what = "spread";
  std::vector<cim::ExternalId> or_seeds;
  std::size_t or_k = 1;
  std::size_t or_max_edges = cim::OracleBudget{}.max_probabilistic_edges;
  auto* oracle = app.add_subcommand("oracle", "exact values on tiny instances");
  add_graph_options(oracle, or_graph);
  oracle->add_option("what", or_what, "spread | optimum | curvature")
      ->check(CLI::IsMember({"spread", "optimum", "curvature"}));
  oracle->add_option("--ap-file", or_aps);
  oracle->add_option("--seeds", or_seeds, "external seed ids (spread)");
  oracle->add_option("-k,--k", or_k)->capture_default_str();
  oracle->add_option("--max-edges", or_max_edges, "probabilistic edge budget")
      ->capture_default_str();

  // ztest
  std::vector<std::uint64_t> counts;
  auto* ztest = app.add_subcommand("ztest", "two-proportion z statistic");
  ztest->add_option("counts", counts, "engaged_t pop_t engaged_c pop_c")->expected(4)->required();

  // sample-aps
  std::string sa_path, sa_weights = "wc";
  double sa_fraction = 0.05;
  std::uint64_t sa_seed = 0;
  auto* sample = app.add_subcommand("sample-aps", "draw a random AP set");
  sample->add_option("-g,--graph", sa_path)->required();
  sample->add_option("-w,--weights", sa_weights)->capture_default_str();
  sample->add_option("--fraction", sa_fraction)->capture_default_str();
  sample->add_option("-s,--seed", sa_seed)->capture_default_str();

  // convert
  GraphArgs cv_graph;
  std::string cv_out;
  auto* convert = app.add_subcommand("convert", "write the binary adjacency cache");
  add_graph_options(convert, cv_graph);
  convert->add_option("-o,--out", cv_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  // Flag-level problems are config errors; everything after loading is data.
  cim::Model model = cim::Model::ic;
  try {
    const GraphArgs* g = select->parsed()     ? &sel_graph
                         : evaluate->parsed() ? &ev_graph
                         : oracle->parsed()   ? &or_graph
                         : convert->parsed()  ? &cv_graph
                                              : nullptr;
    if (g) {
      model = cim::parse_model(g->model);
      cim::parse_weight_mode(g->weights);
    }
    if (sample->parsed()) cim::parse_weight_mode(sa_weights);
    if (select->parsed()) {
      for (const auto& a : cfg.algorithms) {
        const auto& names = cim::bench::registered_algorithms();
        if (std::find(names.begin(), names.end(), a) == names.end())
          throw cim::ValidationError("unknown algorithm '" + a + "'");
      }
      if (cfg.repetitions < 1) throw cim::ValidationError("--reps must be at least 1");
      if (cfg.ap_file.empty() && cfg.ap_fractions.empty())
        throw cim::ValidationError("give --ap-file or --ap-fraction");
      if (!(cfg.epsilon > 0 && cfg.epsilon < 0.5))
        throw cim::ValidationError("--epsilon must lie in (0, 0.5)");
      if (cfg.delta != 0 && !(cfg.delta > 0 && cfg.delta < 1))
        throw cim::ValidationError("--delta must lie in (0, 1)");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (select->parsed()) {
      cfg.graph_path = sel_graph.path;
      cfg.load = load_options(sel_graph);
      cfg.model = model;
      cfg.timing = !no_timing;
      const auto outcome = cim::bench::run_select(cfg);
      std::ostringstream csv;
      cim::bench::write_csv(csv, outcome.records);
      write_text(out_path, csv.str());
      if (!manifest_path.empty()) write_text(manifest_path, outcome.manifest + "\n");
      for (const auto& name : outcome.timed_out)
        std::cerr << "timeout: " << name << " skipped\n";
      return outcome.timed_out.empty() ? kOk : kBudget;
    }
    if (evaluate->parsed()) {
      auto graph = load(ev_graph, model);
      const auto aps = cim::read_ap_file(ev_aps, *graph);
      const auto inst = cim::build_instance(graph, aps, ev_k);
      std::ifstream in(ev_assignment);
      if (!in) throw std::runtime_error("cannot open " + ev_assignment);
      const auto s = cim::read_assignment(in, inst);
      const auto est =
          cim::bench::evaluate_assignment(inst, s, model, ev_trials, ev_seed, ev_workers);
      std::cout << "spread,stderr,trials,seeds\n"
                << fmt(est.mean) << ',' << fmt(est.std_error) << ',' << est.trials << ','
                << s.distinct_seeds().size() << '\n';
      return kOk;
    }
    if (oracle->parsed()) {
      auto graph = load(or_graph, model);
      const auto inst = cim::build_instance(graph, aps_or_empty(or_aps, *graph), or_k);
      cim::OracleBudget budget;
      budget.max_probabilistic_edges = or_max_edges;
      if (or_what == "spread") {
        std::vector<cim::NodeId> seeds;
        for (auto id : or_seeds) {
          const auto v = graph->find(id);
          if (v == cim::kNoNode) throw cim::ValidationError("unknown node " + std::to_string(id));
          const auto p = inst.graph_to_pp(v);
          if (p == cim::kNoNode)
            throw cim::ValidationError("node " + std::to_string(id) + " is not in the induced subgraph");
          seeds.push_back(p);
        }
        const double spread = cim::exact_spread(inst.pp_graph(), model, seeds, budget);
        std::cout << "spread\n" << fmt(spread) << '\n';
      } else if (or_what == "optimum") {
        const auto opt = cim::exact_optimum(inst, model, budget);
        std::cout << "spread," << fmt(opt.spread) << '\n';
        for (std::size_t a = 0; a < inst.num_aps(); ++a)
          for (auto v : opt.assignment.per_ap[a])
            std::cout << inst.ap_external(a) << ' ' << inst.pp_external(v) << '\n';
      } else {
        const auto cur = cim::curvature_gamma_max(inst, model, budget);
        std::cout << "gamma_max,skipped\n" << fmt(cur.gamma_max) << ',' << cur.skipped.size()
                  << '\n';
      }
      return kOk;
    }
    if (ztest->parsed()) {
      std::cout << fmt(cim::bench::z_score(counts[0], counts[1], counts[2], counts[3])) << '\n';
      return kOk;
    }
    if (sample->parsed()) {
      cim::LoadOptions opts;
      opts.mode = cim::parse_weight_mode(sa_weights);
      const auto g = cim::load_graph(sa_path, opts);
      for (auto v : cim::select_random_aps(g, sa_fraction, sa_seed))
        std::cout << g.external_id(v) << '\n';
      return kOk;
    }
    if (convert->parsed()) {
      const auto graph = load(cv_graph, model);
      std::ofstream out(cv_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + cv_out);
      cim::write_binary_cache(out, *graph);
      return kOk;
    }
  } catch (const cim::BudgetError& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
