#pragma once

#include <optional>
#include <string>

#include "decomp/iterative.hpp"
#include "decomp/lp.hpp"
#include "decomp/oracle.hpp"
#include "decomp/separation.hpp"
#include "decomp/trace.hpp"

namespace decomp {

struct LinearExpr {
  std::vector<LpEntry> terms;  // variable index -> coefficient

  double eval(std::span<const double> x) const;
};

/// One block couples some master variables to a capacity polyhedron: the
/// flow expressions must land in conv(vertices) and the overflow expression
/// must dominate the matching overflow coordinate.
struct ProblemBlock {
  BlockData data;
  std::vector<LinearExpr> flow_exprs;  // one per block commodity
  LinearExpr overflow_expr;
};

struct VarSpec {
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct RowSpec {
  std::vector<LpEntry> coeffs;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

/// Minimization problem: base LP (vars/rows) plus block coupling.
struct DecomposableProblem {
  std::vector<VarSpec> vars;
  std::vector<RowSpec> rows;
  std::vector<ProblemBlock> blocks;
};

enum class Stabilization { None, Momentum };

inline constexpr double kDefaultTolerance = 1e-3;
inline constexpr double kMomentumAlpha = 0.8;

struct SolveConfig {
  double tol = kDefaultTolerance;  // absolute bound gap at termination
  double time_limit_s = kInf;      // wall clock
  Stabilization stabilization = Stabilization::None;
  double momentum_alpha = kMomentumAlpha;
  double violation_tol = 1e-6;
  std::string method_label;     // trace method column; defaulted per solver
};

/// Duals of one block's linking rows, in the master's sign convention.
struct BlockDuals {
  std::vector<double> flow;
  double overflow = 0.0;
};

std::vector<double> smooth_duals(std::span<const double> previous,
                                 std::span<const double> fresh, double alpha);

/// Prices one block at the given linking duals: returns the oracle vertex if
/// its column improves the master (reduced cost below -tol), else nullopt.
std::optional<BlockVertex> price_block(const ProblemBlock& block,
                                       const BlockDuals& duals,
                                       double convexity_dual,
                                       double tol = 1e-9,
                                       long* oracle_count = nullptr);

/// Lagrangian dual value at the given linking duals; `oracle_values` holds
/// the per-block oracle optima for those duals. Returns -inf when the relaxed
/// base problem is unbounded.
double lagrangian_bound(const DecomposableProblem& problem,
                        const std::vector<BlockDuals>& duals,
                        std::span<const double> oracle_values);

BoundTrace run_dantzig_wolfe(const DecomposableProblem& problem,
                             const SolveConfig& config = {});
BoundTrace run_fenchel(const DecomposableProblem& problem,
                       const SolveConfig& config = {});
BoundTrace run_dw_fenchel(const DecomposableProblem& problem,
                          const SolveConfig& config = {},
                          bool iterative_separation = false);

/// Reference method: enumerates every block vertex (refuses blocks with more
/// than 20 commodities) and solves the full master once.
BoundTrace run_exact_enumeration(const DecomposableProblem& problem);
double exact_strengthened_value(const DecomposableProblem& problem);

}  // namespace decomp
