#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "decomp/decomposition.hpp"
#include "decomp/trace.hpp"
#include "decomp/ufp.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 2,
  kGeneration = 3,
  kNumerical = 4,
  kTimeLimit = 5,
};

int log_level() {
  const char* env = std::getenv("DECOMP_LOG");
  if (!env) return 0;
  const std::string v = env;
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

struct SolveArgs {
  std::string instance;
  std::string method = "dw";
  double tol = decomp::kDefaultTolerance;
  double time_limit = 0.0;  // 0 = none
  std::string trace_path;
  int k_paths = decomp::kDefaultPathCount;
};

decomp::BoundTrace run_method(const decomp::DecomposableProblem& prob,
                              const std::string& method, double tol,
                              double time_limit) {
  decomp::SolveConfig cfg;
  cfg.tol = tol;
  cfg.time_limit_s = time_limit > 0 ? time_limit : decomp::kInf;
  cfg.method_label = method;
  if (method == "dw") return decomp::run_dantzig_wolfe(prob, cfg);
  if (method == "dw-momentum") {
    cfg.stabilization = decomp::Stabilization::Momentum;
    return decomp::run_dantzig_wolfe(prob, cfg);
  }
  if (method == "fenchel") return decomp::run_fenchel(prob, cfg);
  if (method == "dwf" || method == "dw-fenchel")
    return decomp::run_dw_fenchel(prob, cfg, false);
  if (method == "dwf-iterative" || method == "dw-fenchel-iterative")
    return decomp::run_dw_fenchel(prob, cfg, true);
  if (method == "exact-enum") return decomp::run_exact_enumeration(prob);
  throw CLI::ValidationError("--method", "unknown method: " + method);
}

const std::vector<std::string> kAllMethods = {
    "dw", "dw-momentum", "fenchel", "dwf", "dwf-iterative"};

int cmd_generate(int nodes, std::int64_t dmax, std::int64_t capacity,
                 double density, int max_commodities, std::uint64_t seed,
                 long perturb_rounds, const std::string& out_path) {
  decomp::GeneratorParams params;
  params.nodes = nodes;
  params.d_max = dmax;
  params.capacity = capacity;
  params.arc_density = density;
  params.max_commodities = max_commodities;
  decomp::UfpInstance inst;
  try {
    inst = decomp::generate_instance(params, seed);
    if (perturb_rounds != 0)
      inst = decomp::perturb_capacities(std::move(inst), perturb_rounds,
                                        seed + 1);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const decomp::GenerationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kGeneration;
  }
  decomp::save_instance(inst, out_path);
  std::cout << out_path << "\n"
            << "nodes=" << inst.nodes << " arcs=" << inst.arcs.size()
            << " commodities=" << inst.commodities.size() << "\n";
  return kOk;
}

int cmd_solve(const SolveArgs& args) {
  decomp::UfpInstance inst;
  try {
    inst = decomp::load_instance(args.instance);
  } catch (const decomp::InstanceFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  try {
    auto paths = decomp::build_path_set(inst, args.k_paths);
    auto prob = decomp::build_problem(inst, paths);
    log_info("solving with method " + args.method);
    decomp::BoundTrace trace =
        run_method(prob, args.method, args.tol, args.time_limit);
    if (!args.trace_path.empty()) decomp::save_trace(trace, args.trace_path);
    const auto& last = trace.records.back();
    std::cout << "method=" << args.method
              << " lower_bound=" << last.lower_bound
              << " upper_bound=" << last.upper_bound
              << " iterations=" << last.iteration + 1
              << " oracle_calls=" << last.oracle_calls
              << " terminated=" << trace.termination << "\n";
    if (trace.termination == "time_limit") return kTimeLimit;
    return kOk;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

int cmd_compare(const std::string& instance_path,
                std::vector<std::string> methods, double tol,
                double time_limit, int k_paths,
                const std::string& trace_dir) {
  decomp::UfpInstance inst;
  try {
    inst = decomp::load_instance(instance_path);
  } catch (const decomp::InstanceFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (methods.empty()) methods = kAllMethods;
  try {
    auto paths = decomp::build_path_set(inst, k_paths);
    auto prob = decomp::build_problem(inst, paths);
    const double exact = decomp::exact_strengthened_value(prob);
    std::cout << "exact-enum value=" << exact << "\n";
    for (const auto& m : methods) {
      decomp::BoundTrace trace = run_method(prob, m, tol, time_limit);
      if (!trace_dir.empty())
        decomp::save_trace(trace, trace_dir + "/" + m + ".csv");
      const auto& last = trace.records.back();
      const double gap = std::max(std::fabs(last.lower_bound - exact),
                                  std::fabs(last.upper_bound - exact));
      std::cout << m << " lower_bound=" << last.lower_bound
                << " upper_bound=" << last.upper_bound << " gap=" << gap
                << " terminated=" << trace.termination << "\n";
    }
    return kOk;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

int cmd_aggregate(const std::vector<std::string>& trace_paths, double interval,
                  int resamples, double level, std::uint64_t seed,
                  const std::string& out_path) {
  try {
    std::vector<std::vector<decomp::ResampledPoint>> series;
    double horizon = 0.0;
    for (const auto& p : trace_paths) {
      auto trace = decomp::load_trace(p);
      if (trace.records.empty()) throw decomp::TraceFormatError("empty trace: " + p);
      horizon = std::max(horizon, trace.records.back().time_s);
      series.push_back(decomp::resample_trace(trace, interval));
    }
    // Re-sample every trace onto the common grid; past its own horizon a
    // trace holds its final bounds.
    std::vector<double> grid;
    for (long i = 0; i * interval < horizon; ++i) grid.push_back(i * interval);
    grid.push_back(horizon);

    auto value_at = [&](const std::vector<decomp::ResampledPoint>& s, double t,
                        bool upper) {
      for (const auto& pt : s)
        if (pt.time_s >= t - 1e-12)
          return upper ? pt.upper_bound : pt.lower_bound;
      return upper ? s.back().upper_bound : s.back().lower_bound;
    };

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw decomp::TraceFormatError("cannot open: " + out_path);
      out = &file;
    }
    *out << "time_s,runs,lb_mean,lb_ci_low,lb_ci_high,"
            "ub_mean,ub_ci_low,ub_ci_high\n";
    for (double t : grid) {
      std::vector<double> lbs, ubs;
      for (const auto& s : series) {
        lbs.push_back(value_at(s, t, false));
        ubs.push_back(value_at(s, t, true));
      }
      auto lci = decomp::bootstrap_ci(lbs, resamples, level, seed);
      auto uci = decomp::bootstrap_ci(ubs, resamples, level, seed + 1);
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "%.12g,%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", t,
                    series.size(), lci.mean, lci.lower, lci.upper, uci.mean,
                    uci.lower, uci.upper);
      *out << buf;
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposition bounds for unsplittable flow instances"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random instance");
  int nodes = 0;
  std::int64_t dmax = 0, capacity = 0;
  double density = 3.0;
  std::uint64_t seed = 0;
  long perturb_rounds = 0;
  std::string out_path;
  gen->add_option("--nodes", nodes, "Number of nodes")->required();
  gen->add_option("--dmax", dmax, "Maximum demand")->required();
  gen->add_option("--capacity", capacity, "Uniform arc capacity")->required();
  gen->add_option("--arc-density", density, "Arcs per node (default 3)");
  int max_commodities = -1;
  gen->add_option("--max-commodities", max_commodities,
                  "Stop after this many commodities (-1 = saturate)");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--perturb-rounds", perturb_rounds,
                  "Capacity perturbation rounds (-1 = 100*nodes)");
  gen->add_option("-o,--output", out_path, "Output instance file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Run one method on an instance");
  SolveArgs sargs;
  solve->add_option("--instance", sargs.instance, "Instance file")->required();
  solve->add_option("--method", sargs.method,
                    "dw|dw-momentum|fenchel|dwf|dwf-iterative|exact-enum")
      ->required();
  solve->add_option("--tol", sargs.tol, "Bound gap tolerance (default 1e-3)");
  solve->add_option("--time-limit", sargs.time_limit,
                    "Wall-clock limit in seconds (0 = none)");
  solve->add_option("--trace", sargs.trace_path, "Write the bound trace CSV");
  solve->add_option("--k-paths", sargs.k_paths,
                    "Candidate paths per commodity (default 4)");

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "Run several methods and report gaps to exact-enum");
  std::string cmp_instance, cmp_trace_dir;
  std::vector<std::string> cmp_methods;
  double cmp_tol = decomp::kDefaultTolerance, cmp_time_limit = 0.0;
  int cmp_k_paths = decomp::kDefaultPathCount;
  cmp->add_option("--instance", cmp_instance, "Instance file")->required();
  cmp->add_option("--methods", cmp_methods, "Methods (default: all)")
      ->delimiter(',');
  cmp->add_option("--tol", cmp_tol, "Bound gap tolerance");
  cmp->add_option("--time-limit", cmp_time_limit, "Per-method limit (s)");
  cmp->add_option("--k-paths", cmp_k_paths, "Candidate paths per commodity");
  cmp->add_option("--trace-dir", cmp_trace_dir, "Directory for trace CSVs");

  // aggregate
  auto* agg = app.add_subcommand(
      "aggregate", "Bootstrap-aggregate trace CSVs into a plot-ready series");
  std::vector<std::string> trace_paths;
  double interval = 1.0, level = decomp::kBootstrapLevel;
  int resamples = decomp::kBootstrapResamples;
  std::uint64_t agg_seed = 0;
  std::string agg_out;
  agg->add_option("traces", trace_paths, "Trace CSV files")->required();
  agg->add_option("--interval", interval, "Sample interval seconds (default 1)");
  agg->add_option("--resamples", resamples, "Bootstrap resamples (default 1000)");
  agg->add_option("--level", level, "Confidence level (default 0.95)");
  agg->add_option("--seed", agg_seed, "Bootstrap seed");
  agg->add_option("-o,--output", agg_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (gen->parsed())
    return cmd_generate(nodes, dmax, capacity, density, max_commodities, seed,
                        perturb_rounds, out_path);
  if (solve->parsed()) return cmd_solve(sargs);
  if (cmp->parsed())
    return cmd_compare(cmp_instance, cmp_methods, cmp_tol, cmp_time_limit,
                       cmp_k_paths, cmp_trace_dir);
  if (agg->parsed())
    return cmd_aggregate(trace_paths, interval, resamples, level, agg_seed,
                         agg_out);
  return kUsage;
}
