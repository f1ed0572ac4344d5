#include "decomp/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace decomp {

namespace {
constexpr int kSlackBase = 1 << 30;
constexpr double kPivotTol = 1e-11;
}  // namespace

LinearProgram::LinearProgram(Objective objective) : objective_(objective) {}

int LinearProgram::add_variable(double lower, double upper, double cost) {
  return add_variable(lower, upper, cost, {});
}

int LinearProgram::add_variable(double lower, double upper, double cost,
                                std::span<const LpEntry> column) {
  if (lower > upper) throw std::invalid_argument("variable bounds crossed");
  Col c{lower, upper, cost, {}};
  for (const auto& e : column) {
    if (e.index < 0 || e.index >= num_constraints())
      throw std::invalid_argument("column entry references unknown constraint");
    if (e.value != 0.0) c.entries.push_back(e);
  }
  cols_.push_back(std::move(c));
  return num_variables() - 1;
}

int LinearProgram::add_constraint(std::span<const LpEntry> row, Sense sense,
                                  double rhs) {
  const int i = num_constraints();
  for (const auto& e : row) {
    if (e.index < 0 || e.index >= num_variables())
      throw std::invalid_argument("row entry references unknown variable");
  }
  rows_.push_back(Row{sense, rhs});
  for (const auto& e : row) {
    if (e.value != 0.0) cols_[e.index].entries.push_back({i, e.value});
  }
  if (basis_valid_) basic_.push_back(kSlackBase + i);
  return i;
}

void LinearProgram::set_cost(int var, double cost) { cols_.at(var).cost = cost; }

void LinearProgram::set_bounds(int var, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("variable bounds crossed");
  cols_.at(var).lower = lower;
  cols_.at(var).upper = upper;
}

void LinearProgram::set_rhs(int row, double rhs) { rows_.at(row).rhs = rhs; }

double LinearProgram::col_lower(int j) const {
  if (j >= kSlackBase) {
    switch (rows_[j - kSlackBase].sense) {
      case Sense::Le: return 0.0;
      case Sense::Eq: return 0.0;
      case Sense::Ge: return -kInf;
    }
  }
  return cols_[j].lower;
}

double LinearProgram::col_upper(int j) const {
  if (j >= kSlackBase) {
    switch (rows_[j - kSlackBase].sense) {
      case Sense::Le: return kInf;
      case Sense::Eq: return 0.0;
      case Sense::Ge: return 0.0;
    }
  }
  return cols_[j].upper;
}

double LinearProgram::internal_cost(int j) const {
  if (j >= kSlackBase) return 0.0;
  return objective_ == Objective::Maximize ? -cols_[j].cost : cols_[j].cost;
}

const std::vector<LpEntry>& LinearProgram::col_entries(int j) const {
  if (j >= kSlackBase) {
    slack_col_ = {{j - kSlackBase, 1.0}};
    return slack_col_;
  }
  return cols_[j].entries;
}

void LinearProgram::reset_basis() {
  const int n = num_variables();
  const int m = num_constraints();
  basic_.resize(m);
  vstat_.assign(n + m, VStat::AtLower);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(cols_[j].lower))
      vstat_[j] = VStat::AtLower;
    else if (std::isfinite(cols_[j].upper))
      vstat_[j] = VStat::AtUpper;
    else
      vstat_[j] = VStat::Free;
  }
  for (int i = 0; i < m; ++i) {
    basic_[i] = kSlackBase + i;
    vstat_[n + i] = VStat::Basic;
  }
  basis_valid_ = true;
}

void LinearProgram::refactorize() {
  const int m = num_constraints();
  const int n = num_variables();
  // Dense B from the basic columns, then Gauss-Jordan inversion. When a
  // basic column turns out dependent, eject it for the slack of the row
  // that could not be eliminated and restart; unlike a full reset this
  // keeps the rest of the basis (and the simplex progress it encodes).
  for (int repair = 0;; ++repair) {
    if (repair > m + 1) throw NumericalFailure("basis repair did not terminate");
    std::vector<double> b(static_cast<size_t>(m) * m, 0.0);
    for (int k = 0; k < m; ++k) {
      for (const auto& e : col_entries(basic_[k]))
        b[static_cast<size_t>(e.index) * m + k] = e.value;
    }
    binv_.assign(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) binv_[static_cast<size_t>(i) * m + i] = 1.0;
    std::vector<int> perm(m);  // original row currently at each position
    for (int i = 0; i < m; ++i) perm[i] = i;
    bool repaired = false;
    for (int col = 0; col < m; ++col) {
      int piv = col;
      double best = std::fabs(b[static_cast<size_t>(col) * m + col]);
      for (int r = col + 1; r < m; ++r) {
        double v = std::fabs(b[static_cast<size_t>(r) * m + col]);
        if (v > best) { best = v; piv = r; }
      }
      if (best < 1e-12) {
        const int out = basic_[col];
        const int out_idx = out >= kSlackBase ? n + (out - kSlackBase) : out;
        vstat_[out_idx] = std::isfinite(col_lower(out))   ? VStat::AtLower
                          : std::isfinite(col_upper(out)) ? VStat::AtUpper
                                                          : VStat::Free;
        basic_[col] = kSlackBase + perm[col];
        vstat_[n + perm[col]] = VStat::Basic;
        repaired = true;
        break;
      }
      if (piv != col) {
        std::swap(perm[piv], perm[col]);
        for (int c = 0; c < m; ++c) {
          std::swap(b[static_cast<size_t>(piv) * m + c],
                    b[static_cast<size_t>(col) * m + c]);
          std::swap(binv_[static_cast<size_t>(piv) * m + c],
                    binv_[static_cast<size_t>(col) * m + c]);
        }
      }
      const double d = b[static_cast<size_t>(col) * m + col];
      for (int c = 0; c < m; ++c) {
        b[static_cast<size_t>(col) * m + c] /= d;
        binv_[static_cast<size_t>(col) * m + c] /= d;
      }
      for (int r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = b[static_cast<size_t>(r) * m + col];
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) {
          b[static_cast<size_t>(r) * m + c] -= f * b[static_cast<size_t>(col) * m + c];
          binv_[static_cast<size_t>(r) * m + c] -= f * binv_[static_cast<size_t>(col) * m + c];
        }
      }
    }
    if (!repaired) break;
  }
  pivots_since_refactor_ = 0;
}

std::vector<double> LinearProgram::ftran(int j) const {
  const int m = num_constraints();
  std::vector<double> w(m, 0.0);
  for (const auto& e : col_entries(j)) {
    const double a = e.value;
    const size_t i = e.index;
    for (int k = 0; k < m; ++k) w[k] += a * binv_[static_cast<size_t>(k) * m + i];
  }
  return w;
}

std::vector<double> LinearProgram::btran(const std::vector<double>& cb) const {
  const int m = num_constraints();
  std::vector<double> y(m, 0.0);
  for (int k = 0; k < m; ++k) {
    const double c = cb[k];
    if (c == 0.0) continue;
    for (int i = 0; i < m; ++i) y[i] += c * binv_[static_cast<size_t>(k) * m + i];
  }
  return y;
}

double LinearProgram::nonbasic_value(int j) const {
  const int n = num_variables();
  const int idx = j >= kSlackBase ? n + (j - kSlackBase) : j;
  switch (vstat_[idx]) {
    case VStat::AtLower: return col_lower(j);
    case VStat::AtUpper: return col_upper(j);
    case VStat::Free: return 0.0;
    case VStat::Basic: break;
  }
  return 0.0;
}

void LinearProgram::compute_basic_values() {
  const int n = num_variables();
  const int m = num_constraints();
  std::vector<double> r(m);
  for (int i = 0; i < m; ++i) r[i] = rows_[i].rhs;
  auto subtract = [&](int j) {
    const double v = nonbasic_value(j);
    if (v == 0.0) return;
    for (const auto& e : col_entries(j)) r[e.index] -= e.value * v;
  };
  for (int j = 0; j < n; ++j)
    if (vstat_[j] != VStat::Basic) subtract(j);
  for (int i = 0; i < m; ++i)
    if (vstat_[n + i] != VStat::Basic) subtract(kSlackBase + i);
  xb_.assign(m, 0.0);
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += binv_[static_cast<size_t>(k) * m + i] * r[i];
    xb_[k] = s;
  }
}

double LinearProgram::infeasibility() const {
  double total = 0.0;
  for (size_t k = 0; k < basic_.size(); ++k) {
    const double l = col_lower(basic_[k]);
    const double u = col_upper(basic_[k]);
    if (xb_[k] < l) total += l - xb_[k];
    if (xb_[k] > u) total += xb_[k] - u;
  }
  return total;
}

// Returns false when no finite ratio exists (unbounded direction).
bool LinearProgram::pivot(int entering, int dir, const std::vector<double>& w,
                          bool phase_one, bool* progressed) {
  const int n = num_variables();
  const int m = num_constraints();
  const double ftol = limits_.feas_tol;
  const bool bland = degenerate_streak_ > limits_.stall_threshold;

  double theta = kInf;
  int leaving = -1;            // row index, -1 = bound flip
  bool leave_at_upper = false;
  double best_piv = 0.0;

  const double el = col_lower(entering);
  const double eu = col_upper(entering);
  if (std::isfinite(el) && std::isfinite(eu)) theta = eu - el;

  for (int k = 0; k < m; ++k) {
    if (std::fabs(w[k]) <= kPivotTol) continue;
    const double delta = -dir * w[k];  // basic k moves at this rate
    const int bj = basic_[k];
    const double l = col_lower(bj);
    const double u = col_upper(bj);
    const double v = xb_[k];
    double bound;
    bool to_upper;
    if (delta > 0) {
      // A basic moving further above its upper bound never blocks in phase 1:
      // its unit infeasibility cost is already part of the pricing.
      if (phase_one && v > u + ftol) continue;
      if (phase_one && v < l - ftol) { bound = l; to_upper = false; }
      else { bound = u; to_upper = true; }
    } else {
      if (phase_one && v < l - ftol) continue;
      if (phase_one && v > u + ftol) { bound = u; to_upper = true; }
      else { bound = l; to_upper = false; }
    }
    if (!std::isfinite(bound)) continue;
    double t = (bound - v) / delta;
    if (t < 0.0) t = 0.0;
    bool better;
    if (bland) {
      better = t < theta - 1e-12 ||
               (t <= theta + 1e-12 && (leaving == -1 || bj < basic_[leaving]));
    } else {
      better = t < theta - 1e-12 ||
               (t <= theta + 1e-12 && std::fabs(w[k]) > best_piv);
    }
    if (better) {
      theta = t;
      leaving = k;
      leave_at_upper = to_upper;
      best_piv = std::fabs(w[k]);
    }
  }

  if (!std::isfinite(theta)) return false;

  *progressed = theta > 1e-10;
  if (*progressed)
    degenerate_streak_ = 0;
  else
    ++degenerate_streak_;

  if (leaving == -1) {
    // Bound flip of the entering variable.
    const int idx = entering >= kSlackBase ? n + (entering - kSlackBase) : entering;
    for (int k = 0; k < m; ++k) xb_[k] -= dir * theta * w[k];
    vstat_[idx] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
    return true;
  }

  const double piv = w[leaving];
  if (std::fabs(piv) < kPivotTol) {
    refactorize();
    compute_basic_values();
    *progressed = false;
    return true;
  }

  const double enter_value = nonbasic_value(entering) + dir * theta;
  for (int k = 0; k < m; ++k)
    if (k != leaving) xb_[k] -= dir * theta * w[k];
  xb_[leaving] = enter_value;

  const int out = basic_[leaving];
  const int out_idx = out >= kSlackBase ? n + (out - kSlackBase) : out;
  const int in_idx = entering >= kSlackBase ? n + (entering - kSlackBase) : entering;
  vstat_[out_idx] = leave_at_upper ? VStat::AtUpper : VStat::AtLower;
  if (!std::isfinite(leave_at_upper ? col_upper(out) : col_lower(out)))
    vstat_[out_idx] = VStat::Free;  // cannot happen for blocked rows, defensive
  vstat_[in_idx] = VStat::Basic;
  basic_[leaving] = entering;

  // Eta update of the dense inverse.
  double* br = binv_.data() + static_cast<size_t>(leaving) * m;
  for (int c = 0; c < m; ++c) br[c] /= piv;
  for (int k = 0; k < m; ++k) {
    if (k == leaving) continue;
    const double f = w[k];
    if (f == 0.0) continue;
    double* bk = binv_.data() + static_cast<size_t>(k) * m;
    for (int c = 0; c < m; ++c) bk[c] -= f * br[c];
  }

  if (++pivots_since_refactor_ >= refactor_interval_) {
    refactorize();
    compute_basic_values();
  }
  return true;
}

bool LinearProgram::phase1() {
  const int n = num_variables();
  const int m = num_constraints();
  const double ftol = limits_.feas_tol;
  while (true) {
    if (++iterations_ > limits_.max_iterations)
      throw NumericalFailure("simplex iteration limit exceeded in phase 1");
    bool feasible = true;
    std::vector<double> cb(m, 0.0);
    for (int k = 0; k < m; ++k) {
      const double l = col_lower(basic_[k]);
      const double u = col_upper(basic_[k]);
      if (xb_[k] < l - ftol) { cb[k] = -1.0; feasible = false; }
      else if (xb_[k] > u + ftol) { cb[k] = 1.0; feasible = false; }
    }
    if (feasible) return true;
    const auto y = btran(cb);

    const bool bland = degenerate_streak_ > limits_.stall_threshold;
    int entering = -1, dir = 0;
    double best = limits_.opt_tol;
    auto consider = [&](int j, int idx) {
      if (vstat_[idx] == VStat::Basic) return;
      double d = 0.0;
      for (const auto& e : col_entries(j)) d -= y[e.index] * e.value;
      const VStat s = vstat_[idx];
      int cand_dir = 0;
      double score = 0.0;
      if ((s == VStat::AtLower || s == VStat::Free) && d < -limits_.opt_tol) {
        cand_dir = 1; score = -d;
      } else if ((s == VStat::AtUpper || s == VStat::Free) && d > limits_.opt_tol) {
        cand_dir = -1; score = d;
      }
      if (cand_dir == 0) return;
      if (bland) {
        if (entering == -1) { entering = j; dir = cand_dir; }
      } else if (score > best) {
        best = score; entering = j; dir = cand_dir;
      }
    };
    for (int j = 0; j < n; ++j) consider(j, j);
    for (int i = 0; i < m; ++i) consider(kSlackBase + i, n + i);
    if (entering == -1) return false;  // infeasible

    const auto w = ftran(entering);
    bool progressed = false;
    if (!pivot(entering, dir, w, /*phase_one=*/true, &progressed))
      throw NumericalFailure("phase 1 produced an unbounded improving ray");
  }
}

LpStatus LinearProgram::phase2() {
  const int n = num_variables();
  const int m = num_constraints();
  while (true) {
    if (++iterations_ > limits_.max_iterations)
      throw NumericalFailure("simplex iteration limit exceeded in phase 2");
    std::vector<double> cb(m);
    for (int k = 0; k < m; ++k) cb[k] = internal_cost(basic_[k]);
    const auto y = btran(cb);

    const bool bland = degenerate_streak_ > limits_.stall_threshold;
    int entering = -1, dir = 0;
    double best = limits_.opt_tol;
    auto consider = [&](int j, int idx) {
      if (vstat_[idx] == VStat::Basic) return;
      double d = internal_cost(j);
      for (const auto& e : col_entries(j)) d -= y[e.index] * e.value;
      const VStat s = vstat_[idx];
      int cand_dir = 0;
      double score = 0.0;
      if ((s == VStat::AtLower || s == VStat::Free) && d < -limits_.opt_tol) {
        cand_dir = 1; score = -d;
      } else if ((s == VStat::AtUpper || s == VStat::Free) && d > limits_.opt_tol) {
        cand_dir = -1; score = d;
      }
      if (cand_dir == 0) return;
      if (bland) {
        if (entering == -1) { entering = j; dir = cand_dir; }
      } else if (score > best) {
        best = score; entering = j; dir = cand_dir;
      }
    };
    for (int j = 0; j < n; ++j) consider(j, j);
    for (int i = 0; i < m; ++i) consider(kSlackBase + i, n + i);
    if (entering == -1) return LpStatus::Optimal;

    const auto w = ftran(entering);
    bool progressed = false;
    if (!pivot(entering, dir, w, /*phase_one=*/false, &progressed))
      return LpStatus::Unbounded;
  }
}

LpSolution LinearProgram::solve() {
  const int n = num_variables();
  const int m = num_constraints();
  iterations_ = 0;
  degenerate_streak_ = 0;

  // vstat_ can be stale when both rows and columns were added since the last
  // solve (layout is [vars..., slacks...]); rebuild conservatively.
  if (!basis_valid_ || static_cast<int>(vstat_.size()) != n + m ||
      static_cast<int>(basic_.size()) != m) {
    // Try to preserve the basic set if only rows were appended in order.
    bool salvage = basis_valid_ && static_cast<int>(basic_.size()) == m;
    if (salvage) {
      std::vector<VStat> fresh(n + m, VStat::AtLower);
      for (int j = 0; j < n; ++j) {
        fresh[j] = std::isfinite(cols_[j].lower)   ? VStat::AtLower
                   : std::isfinite(cols_[j].upper) ? VStat::AtUpper
                                                   : VStat::Free;
      }
      for (int i = 0; i < m; ++i)
        fresh[n + i] = rows_[i].sense == Sense::Ge ? VStat::AtUpper : VStat::AtLower;
      for (int k = 0; k < m; ++k) {
        const int j = basic_[k];
        if (j >= kSlackBase) {
          if (j - kSlackBase >= m) { salvage = false; break; }
          fresh[n + (j - kSlackBase)] = VStat::Basic;
        } else {
          if (j >= n) { salvage = false; break; }
          fresh[j] = VStat::Basic;
        }
      }
      if (salvage) vstat_ = std::move(fresh);
    }
    if (!salvage) reset_basis();
    basis_valid_ = true;
  }

  refactorize();
  compute_basic_values();

  LpSolution sol;
  auto basis_feasible = [&] {
    for (int k = 0; k < m; ++k) {
      const double l = col_lower(basic_[k]);
      const double u = col_upper(basic_[k]);
      if (xb_[k] < l - limits_.feas_tol || xb_[k] > u + limits_.feas_tol)
        return false;
    }
    return true;
  };
  // Both phases work on eta-updated values, which can drift badly through
  // tiny pivots. Trust a result only when, after a fresh factorization, the
  // basis is still feasible and a pricing pass makes no further pivots.
  bool unbounded_retry = false;
  refactor_interval_ = 128;
  for (int round = 0;; ++round) {
    if (round >= 6) throw NumericalFailure("simplex failed to stabilize");
    // A failed verification round means eta updates drifted; redo the work
    // with progressively eager refactorization until every ratio test runs
    // on exact data.
    if (round > 0) refactor_interval_ = std::max<long>(1, refactor_interval_ / 16);
    for (int attempt = 0; !basis_feasible(); ++attempt) {
      if (attempt >= 3) throw NumericalFailure("phase 1 failed to converge");
      if (!phase1()) {
        sol.status = LpStatus::Infeasible;
        return sol;
      }
      refactorize();
      compute_basic_values();
    }
    const long before = iterations_;
    sol.status = phase2();
    if (sol.status == LpStatus::Unbounded && !unbounded_retry) {
      // The unbounded ray was computed from a possibly drifted inverse;
      // confirm it once from a clean factorization.
      unbounded_retry = true;
      refactorize();
      compute_basic_values();
      continue;
    }
    if (sol.status != LpStatus::Optimal) return sol;
    refactorize();
    compute_basic_values();
    if (iterations_ == before + 1 && basis_feasible()) break;
  }

  sol.primal.resize(n);
  std::vector<int> row_of(n, -1);
  for (int k = 0; k < m; ++k) {
    if (basic_[k] < kSlackBase) row_of[basic_[k]] = k;
  }
  for (int j = 0; j < n; ++j) {
    sol.primal[j] = row_of[j] >= 0 ? xb_[row_of[j]] : nonbasic_value(j);
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += cols_[j].cost * sol.primal[j];
  sol.objective = obj;

  std::vector<double> cb(m);
  for (int k = 0; k < m; ++k) cb[k] = internal_cost(basic_[k]);
  auto y = btran(cb);
  sol.duals.resize(m);
  for (int i = 0; i < m; ++i)
    sol.duals[i] = objective_ == Objective::Maximize ? -y[i] : y[i];
  return sol;
}

}  // namespace decomp
