#include "decomp/decomposition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

namespace decomp {

namespace {

constexpr double kPricingTol = 1e-9;

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::vector<LpEntry> combine_terms(const std::map<int, double>& acc) {
  std::vector<LpEntry> row;
  for (auto [idx, val] : acc)
    if (val != 0.0) row.push_back({idx, val});
  return row;
}

void add_base(LinearProgram& lp, const DecomposableProblem& prob) {
  for (const auto& v : prob.vars) lp.add_variable(v.lower, v.upper, v.cost);
  for (const auto& r : prob.rows) lp.add_constraint(r.coeffs, Sense(r.sense), r.rhs);
}

// Restricted master over block vertices: per block the linking rows
//   expr_k(x) - sum lambda f_k = 0,  expr_o(x) - sum lambda o >= 0,
//   sum lambda = 1.
struct DwMaster {
  LinearProgram lp{Objective::Minimize};
  const DecomposableProblem* prob;
  std::vector<std::vector<int>> flow_rows;
  std::vector<int> o_rows, conv_rows;
  struct Lambda {
    std::vector<std::uint8_t> pattern;
    double overflow;
    int var;
  };
  std::vector<std::vector<Lambda>> lambdas;
  std::vector<std::set<std::vector<std::uint8_t>>> seen;

  explicit DwMaster(const DecomposableProblem& p) : prob(&p) {
    add_base(lp, p);
    const int nb = static_cast<int>(p.blocks.size());
    flow_rows.resize(nb);
    lambdas.resize(nb);
    seen.resize(nb);
    for (int b = 0; b < nb; ++b) {
      const auto& blk = p.blocks[b];
      for (const auto& e : blk.flow_exprs)
        flow_rows[b].push_back(lp.add_constraint(e.terms, Sense::Eq, 0.0));
      o_rows.push_back(lp.add_constraint(blk.overflow_expr.terms, Sense::Ge, 0.0));
      conv_rows.push_back(lp.add_constraint({}, Sense::Eq, 1.0));
    }
  }

  void seed() {
    // conv{0, 1} only spans equal-coordinate flow profiles, which rarely
    // contains a base-feasible point. Take any base-feasible x and add the
    // staircase decomposition of each block's flows at x: nested patterns
    // whose convex combination reproduces those flows exactly, so the
    // restricted master starts feasible.
    LinearProgram base(Objective::Minimize);
    for (const auto& v : prob->vars) base.add_variable(v.lower, v.upper, 0.0);
    for (const auto& r : prob->rows) base.add_constraint(r.coeffs, r.sense, r.rhs);
    LpSolution x0 = base.solve();
    if (x0.status != LpStatus::Optimal)
      throw NumericalFailure("base problem has no feasible point");

    for (size_t b = 0; b < prob->blocks.size(); ++b) {
      const auto& blk = prob->blocks[b];
      const auto& data = blk.data;
      const int k = data.size();
      add_vertex(static_cast<int>(b),
                 make_vertex(data, std::vector<std::uint8_t>(k, 0)));
      if (k > 0)
        add_vertex(static_cast<int>(b),
                   make_vertex(data, std::vector<std::uint8_t>(k, 1)));

      std::vector<double> f(k);
      for (int i = 0; i < k; ++i)
        f[i] = std::clamp(blk.flow_exprs[i].eval(x0.primal), 0.0, 1.0);
      std::vector<double> levels;
      for (double v : f)
        if (v > 1e-12) levels.push_back(v);
      std::sort(levels.begin(), levels.end());
      for (double t : levels) {
        std::vector<std::uint8_t> pat(k);
        for (int i = 0; i < k; ++i)
          pat[i] = static_cast<std::uint8_t>(f[i] >= t - 1e-12);
        add_vertex(static_cast<int>(b), make_vertex(data, std::move(pat)));
      }
    }
  }

  bool add_vertex(int b, const BlockVertex& v) {
    if (!seen[b].insert(v.pattern).second) return false;
    std::vector<LpEntry> col;
    for (size_t k = 0; k < v.pattern.size(); ++k)
      if (v.pattern[k]) col.push_back({flow_rows[b][k], -1.0});
    if (v.overflow != 0.0) col.push_back({o_rows[b], -v.overflow});
    col.push_back({conv_rows[b], 1.0});
    const int var = lp.add_variable(0.0, kInf, 0.0, col);
    lambdas[b].push_back({v.pattern, v.overflow, var});
    return true;
  }

  BlockPoint anchor(int b, std::span<const double> primal) const {
    const auto& blk = prob->blocks[b];
    BlockPoint p;
    p.flows.assign(blk.data.size(), 0.0);
    for (const auto& l : lambdas[b]) {
      const double w = primal[l.var];
      if (w == 0.0) continue;
      for (size_t k = 0; k < l.pattern.size(); ++k)
        if (l.pattern[k]) p.flows[k] += w;
      p.overflow += w * l.overflow;
    }
    return p;
  }

  void extract_duals(const LpSolution& sol, std::vector<BlockDuals>& duals,
                     std::vector<double>& mu) const {
    const int nb = static_cast<int>(prob->blocks.size());
    duals.assign(nb, {});
    mu.assign(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
      for (int r : flow_rows[b]) duals[b].flow.push_back(sol.duals[r]);
      duals[b].overflow = std::max(0.0, sol.duals[o_rows[b]]);
      mu[b] = sol.duals[conv_rows[b]];
    }
  }
};

// Cutting-plane master: base LP plus per-block valid inequalities in the
// (f, o) coordinates, expanded through the linking expressions.
struct FenchelMaster {
  LinearProgram lp{Objective::Minimize};
  const DecomposableProblem* prob;

  explicit FenchelMaster(const DecomposableProblem& p) : prob(&p) {
    add_base(lp, p);
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      const auto& blk = p.blocks[b];
      Cut capacity;
      capacity.coeffs.reserve(blk.data.size());
      for (auto d : blk.data.demands)
        capacity.coeffs.push_back(static_cast<double>(d));
      capacity.overflow_coeff = -1.0;
      capacity.rhs = static_cast<double>(blk.data.capacity);
      add_cut(static_cast<int>(b), capacity);
    }
  }

  void add_cut(int b, const Cut& cut) {
    const auto& blk = prob->blocks[b];
    std::map<int, double> acc;
    for (size_t k = 0; k < cut.coeffs.size(); ++k) {
      if (cut.coeffs[k] == 0.0) continue;
      for (const auto& e : blk.flow_exprs[k].terms)
        acc[e.index] += cut.coeffs[k] * e.value;
    }
    if (cut.overflow_coeff != 0.0)
      for (const auto& e : blk.overflow_expr.terms)
        acc[e.index] += cut.overflow_coeff * e.value;
    lp.add_constraint(combine_terms(acc), Sense::Le, cut.rhs);
  }

  BlockPoint point(int b, std::span<const double> primal) const {
    const auto& blk = prob->blocks[b];
    BlockPoint p;
    for (const auto& e : blk.flow_exprs) p.flows.push_back(e.eval(primal));
    p.overflow = blk.overflow_expr.eval(primal);
    return p;
  }
};

LpSolution solve_master(LinearProgram& lp, const char* what) {
  LpSolution sol = lp.solve();
  if (sol.status != LpStatus::Optimal)
    throw NumericalFailure(std::string(what) + " master did not solve to optimality");
  return sol;
}

}  // namespace

double LinearExpr::eval(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& e : terms) s += e.value * x[e.index];
  return s;
}

std::vector<double> smooth_duals(std::span<const double> previous,
                                 std::span<const double> fresh, double alpha) {
  if (previous.size() != fresh.size())
    throw std::invalid_argument("dual vector size mismatch");
  std::vector<double> out(fresh.size());
  for (size_t i = 0; i < fresh.size(); ++i)
    out[i] = alpha * previous[i] + (1.0 - alpha) * fresh[i];
  return out;
}

std::optional<BlockVertex> price_block(const ProblemBlock& block,
                                       const BlockDuals& duals,
                                       double convexity_dual, double tol,
                                       long* oracle_count) {
  DualWeights w;
  w.profits.reserve(duals.flow.size());
  for (double y : duals.flow) w.profits.push_back(-y);
  w.overflow_price = std::max(0.0, duals.overflow);
  BlockVertex v = capacity_oracle(block.data, w);
  if (oracle_count) ++*oracle_count;
  if (v.value + convexity_dual <= tol) return std::nullopt;
  return v;
}

double lagrangian_bound(const DecomposableProblem& problem,
                        const std::vector<BlockDuals>& duals,
                        std::span<const double> oracle_values) {
  LinearProgram lp(Objective::Minimize);
  std::vector<double> cost;
  cost.reserve(problem.vars.size());
  for (const auto& v : problem.vars) cost.push_back(v.cost);
  for (size_t b = 0; b < problem.blocks.size(); ++b) {
    const auto& blk = problem.blocks[b];
    for (size_t k = 0; k < blk.flow_exprs.size(); ++k)
      for (const auto& e : blk.flow_exprs[k].terms)
        cost[e.index] -= duals[b].flow[k] * e.value;
    for (const auto& e : blk.overflow_expr.terms)
      cost[e.index] -= duals[b].overflow * e.value;
  }
  for (size_t j = 0; j < problem.vars.size(); ++j)
    lp.add_variable(problem.vars[j].lower, problem.vars[j].upper, cost[j]);
  for (const auto& r : problem.rows) lp.add_constraint(r.coeffs, r.sense, r.rhs);

  LpSolution sol = lp.solve();
  if (sol.status == LpStatus::Unbounded) return -kInf;
  if (sol.status != LpStatus::Optimal)
    throw NumericalFailure("relaxed base problem infeasible");
  double bound = sol.objective;
  for (double z : oracle_values) bound -= z;
  return bound;
}

BoundTrace run_dantzig_wolfe(const DecomposableProblem& problem,
                             const SolveConfig& config) {
  Clock clock;
  const bool momentum = config.stabilization == Stabilization::Momentum;
  const std::string label =
      !config.method_label.empty() ? config.method_label
                                   : (momentum ? "dw-momentum" : "dw");
  DwMaster master(problem);
  master.seed();

  const int nb = static_cast<int>(problem.blocks.size());
  BoundTrace trace;
  double lb = -kInf, ub = kInf;
  long calls = 0;
  std::vector<BlockDuals> smoothed;
  bool have_smoothed = false;

  for (int iter = 0;; ++iter) {
    LpSolution sol = solve_master(master.lp, "column generation");
    ub = std::min(ub, sol.objective);

    std::vector<BlockDuals> fresh;
    std::vector<double> mu;
    master.extract_duals(sol, fresh, mu);

    if (momentum && have_smoothed) {
      for (int b = 0; b < nb; ++b) {
        smoothed[b].flow = smooth_duals(smoothed[b].flow, fresh[b].flow,
                                        config.momentum_alpha);
        smoothed[b].overflow =
            std::max(0.0, config.momentum_alpha * smoothed[b].overflow +
                              (1.0 - config.momentum_alpha) * fresh[b].overflow);
      }
    } else {
      smoothed = fresh;
    }
    have_smoothed = true;

    auto price_all = [&](const std::vector<BlockDuals>& y, int* added) {
      std::vector<double> z(nb);
      std::vector<BlockVertex> verts(nb);
      for (int b = 0; b < nb; ++b) {
        DualWeights w;
        for (double yk : y[b].flow) w.profits.push_back(-yk);
        w.overflow_price = std::max(0.0, y[b].overflow);
        verts[b] = capacity_oracle(problem.blocks[b].data, w);
        ++calls;
        z[b] = verts[b].value;
      }
      lb = std::max(lb, lagrangian_bound(problem, y, z));
      *added = 0;
      for (int b = 0; b < nb; ++b)
        if (z[b] + mu[b] > kPricingTol && master.add_vertex(b, verts[b]))
          ++*added;
    };

    int added = 0;
    price_all(smoothed, &added);
    bool exact_pass = !momentum;
    if (momentum && added == 0) {
      // Smoothed duals mis-priced; fall back to the true duals before
      // declaring optimality.
      price_all(fresh, &added);
      exact_pass = true;
    }

    std::string term;
    if (ub - lb <= config.tol) {
      term = "converged";
    } else if (added == 0 && exact_pass) {
      // No column prices out: the restricted master is the full master.
      lb = ub;
      term = "converged";
    } else if (clock.elapsed() > config.time_limit_s) {
      term = "time_limit";
    }

    trace.records.push_back(
        {clock.elapsed(), iter, lb, ub, calls, label});
    if (!term.empty()) {
      trace.termination = term;
      return trace;
    }
  }
}

BoundTrace run_fenchel(const DecomposableProblem& problem,
                       const SolveConfig& config) {
  Clock clock;
  const std::string label =
      !config.method_label.empty() ? config.method_label : "fenchel";
  FenchelMaster outer(problem);
  DwMaster inner(problem);
  inner.seed();

  const int nb = static_cast<int>(problem.blocks.size());
  BoundTrace trace;
  double lb = -kInf, ub = kInf;
  long calls = 0;

  for (int iter = 0;; ++iter) {
    LpSolution fsol = solve_master(outer.lp, "cutting plane");
    lb = std::max(lb, fsol.objective);

    int cuts = 0;
    for (int b = 0; b < nb; ++b) {
      BlockPoint pt = outer.point(b, fsol.primal);
      auto res = separate_with_reduction(pt, problem.blocks[b].data,
                                         Normalization::natural(),
                                         config.violation_tol, &calls);
      if (!res) continue;
      if (res->violation > config.violation_tol) {
        outer.add_cut(b, res->cut);
        ++cuts;
      }
      for (const auto& tv : res->tight_vertices) inner.add_vertex(b, tv);
    }

    LpSolution dsol = solve_master(inner.lp, "column generation");
    ub = std::min(ub, dsol.objective);

    std::string term;
    if (ub - lb <= config.tol) {
      term = "converged";
    } else if (cuts == 0) {
      // Every block point is inside its polyhedron, so the cutting-plane
      // optimum solves the strengthened relaxation exactly.
      ub = lb;
      term = "converged";
    } else if (clock.elapsed() > config.time_limit_s) {
      term = "time_limit";
    }

    trace.records.push_back({clock.elapsed(), iter, lb, ub, calls, label});
    if (!term.empty()) {
      trace.termination = term;
      return trace;
    }
  }
}

BoundTrace run_dw_fenchel(const DecomposableProblem& problem,
                          const SolveConfig& config, bool iterative_separation) {
  Clock clock;
  const std::string label = !config.method_label.empty()
                                ? config.method_label
                                : (iterative_separation ? "dw-fenchel-iterative"
                                                        : "dw-fenchel");
  FenchelMaster outer(problem);
  DwMaster inner(problem);
  inner.seed();

  const int nb = static_cast<int>(problem.blocks.size());
  BoundTrace trace;
  double lb = -kInf, ub = kInf;
  long calls = 0;

  for (int iter = 0;; ++iter) {
    LpSolution fsol = solve_master(outer.lp, "cutting plane");
    lb = std::max(lb, fsol.objective);
    LpSolution dsol = solve_master(inner.lp, "column generation");
    ub = std::min(ub, dsol.objective);

    std::vector<BlockDuals> duals;
    std::vector<double> mu;
    inner.extract_duals(dsol, duals, mu);

    int progress = 0;
    std::string term;
    if (ub - lb <= config.tol) term = "converged";
    if (clock.elapsed() > config.time_limit_s && term.empty())
      term = "time_limit";

    if (term.empty()) {
      for (int b = 0; b < nb; ++b) {
        BlockPoint cp = outer.point(b, fsol.primal);   // cutting-plane point
        BlockPoint ip = inner.anchor(b, dsol.primal);  // inner feasible point
        double diff = std::fabs(cp.overflow - ip.overflow);
        for (size_t k = 0; k < cp.flows.size(); ++k)
          diff = std::max(diff, std::fabs(cp.flows[k] - ip.flows[k]));

        if (diff < 1e-9) continue;  // points coincide, nothing to separate

        std::optional<SeparationResult> res;
        if (iterative_separation) {
          IterativeConfig icfg;
          icfg.membership_tol = config.violation_tol;
          auto r = directional_separate_iterative(cp, ip,
                                                  problem.blocks[b].data, icfg);
          if (r) {
            calls += r->sep.oracle_calls;
            res = std::move(r->sep);
          }
        } else {
          res = separate(cp, problem.blocks[b].data,
                         Normalization::directional(ip), config.violation_tol,
                         &calls);
        }
        if (!res) continue;
        if (res->violation > config.violation_tol) {
          outer.add_cut(b, res->cut);
          ++progress;
        }
        for (const auto& tv : res->tight_vertices)
          if (inner.add_vertex(b, tv)) ++progress;
      }

      for (int b = 0; b < nb; ++b) {
        auto v = price_block(problem.blocks[b], duals[b], mu[b], kPricingTol,
                             &calls);
        if (v && inner.add_vertex(b, *v)) ++progress;
      }
      if (progress == 0 && term.empty()) term = "stalled";
    }

    trace.records.push_back({clock.elapsed(), iter, lb, ub, calls, label});
    if (!term.empty()) {
      trace.termination = term;
      return trace;
    }
  }
}

BoundTrace run_exact_enumeration(const DecomposableProblem& problem) {
  Clock clock;
  DwMaster master(problem);
  for (size_t b = 0; b < problem.blocks.size(); ++b) {
    const int k = problem.blocks[b].data.size();
    if (k > 20)
      throw std::invalid_argument(
          "exact enumeration refuses blocks with more than 20 commodities");
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<std::uint8_t> pat(k);
      for (int i = 0; i < k; ++i) pat[i] = (mask >> i) & 1u;
      master.add_vertex(static_cast<int>(b),
                        make_vertex(problem.blocks[b].data, std::move(pat)));
    }
  }
  LpSolution sol = solve_master(master.lp, "enumeration");
  BoundTrace trace;
  trace.records.push_back(
      {clock.elapsed(), 0, sol.objective, sol.objective, 0, "exact-enum"});
  trace.termination = "converged";
  return trace;
}

double exact_strengthened_value(const DecomposableProblem& problem) {
  return run_exact_enumeration(problem).records.back().upper_bound;
}

}  // namespace decomp
