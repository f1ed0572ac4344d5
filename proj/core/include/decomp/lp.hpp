#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace decomp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Le, Eq, Ge };
enum class Objective { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Sparse coefficient: `index` refers to a variable (in a row) or a
/// constraint (in a column).
struct LpEntry {
  int index;
  double value;
};

/// Thrown when the simplex cannot make progress within the iteration budget
/// or the basis becomes numerically singular. Callers may rescale and retry.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  std::vector<double> primal;  // one per variable, valid when Optimal
  std::vector<double> duals;   // one per constraint, valid when Optimal
};

struct LpLimits {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int stall_threshold = 50;  // degenerate pivots before switching to Bland's rule
  long max_iterations = 200000;
};

/// Incremental LP model solved by a bounded-variable revised simplex with a
/// dense basis inverse. Rows and columns can be added between solves; the
/// previous basis is reused when still primal feasible, otherwise phase 1
/// restarts from it.
///
/// Duals follow the convention that for a minimization problem with a
/// >= constraint the dual is nonnegative, and for a maximization problem
/// with a <= constraint the dual is nonnegative. Degenerate optima return
/// the duals of the final basis; callers must not assume uniqueness.
class LinearProgram {
 public:
  explicit LinearProgram(Objective objective = Objective::Minimize);

  int add_variable(double lower, double upper, double cost);
  int add_variable(double lower, double upper, double cost,
                   std::span<const LpEntry> column);
  int add_constraint(std::span<const LpEntry> row, Sense sense, double rhs);

  void set_cost(int var, double cost);
  void set_bounds(int var, double lower, double upper);
  void set_rhs(int row, double rhs);

  int num_variables() const { return static_cast<int>(cols_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  Objective objective_sense() const { return objective_; }

  LpSolution solve();

  LpLimits& limits() { return limits_; }
  const LpLimits& limits() const { return limits_; }

 private:
  struct Col {
    double lower, upper, cost;
    std::vector<LpEntry> entries;  // row index -> coefficient
  };
  struct Row {
    Sense sense;
    double rhs;
  };
  enum class VStat : unsigned char { Basic, AtLower, AtUpper, Free };

  int total_cols() const { return num_variables() + num_constraints(); }
  double col_lower(int j) const;
  double col_upper(int j) const;
  double internal_cost(int j) const;
  const std::vector<LpEntry>& col_entries(int j) const;

  void reset_basis();
  void grow_basis_for_new_row(int row);
  void refactorize();
  std::vector<double> ftran(int j) const;
  std::vector<double> btran(const std::vector<double>& cb) const;
  void compute_basic_values();
  double nonbasic_value(int j) const;
  double infeasibility() const;
  bool phase1();
  LpStatus phase2();
  bool pivot(int entering, int dir, const std::vector<double>& w,
             bool phase_one, bool* progressed);

  Objective objective_;
  LpLimits limits_;
  std::vector<Col> cols_;
  std::vector<Row> rows_;
  mutable std::vector<LpEntry> slack_col_;  // scratch

  // simplex state
  bool basis_valid_ = false;
  std::vector<int> basic_;            // size m, column index per row
  std::vector<VStat> vstat_;          // size n + m
  std::vector<double> binv_;          // m x m row-major
  std::vector<double> xb_;            // basic values
  long pivots_since_refactor_ = 0;
  long refactor_interval_ = 128;
  long degenerate_streak_ = 0;
  long iterations_ = 0;
};

}  // namespace decomp
