#include "persuade/convex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace persuade {

LinearProgram LinearProgram::zeros(int vars, int ineqs, int eqs) {
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(vars);
  lp.ineq_a = Eigen::MatrixXd::Zero(ineqs, vars);
  lp.ineq_b = Eigen::VectorXd::Zero(ineqs);
  lp.eq_a = Eigen::MatrixXd::Zero(eqs, vars);
  lp.eq_b = Eigen::VectorXd::Zero(eqs);
  lp.lower = Eigen::VectorXd::Zero(vars);
  lp.upper = Eigen::VectorXd::Constant(vars, kInf);
  return lp;
}

QuadraticProgram QuadraticProgram::zeros(int vars, int ineqs, int eqs) {
  QuadraticProgram qp;
  qp.quad_diag = Eigen::VectorXd::Zero(vars);
  qp.linear = Eigen::VectorXd::Zero(vars);
  qp.ineq_a = Eigen::MatrixXd::Zero(ineqs, vars);
  qp.ineq_b = Eigen::VectorXd::Zero(ineqs);
  qp.eq_a = Eigen::MatrixXd::Zero(eqs, vars);
  qp.eq_b = Eigen::VectorXd::Zero(eqs);
  qp.lower = Eigen::VectorXd::Zero(vars);
  qp.upper = Eigen::VectorXd::Constant(vars, kInf);
  return qp;
}

namespace {

// How an original variable maps onto the nonnegative tableau variables.
struct VariableMap {
  enum class Kind { kShift, kNegShift, kSplit } kind;
  int column = 0;        // first tableau column
  int column_neg = -1;   // second column for kSplit
  double offset = 0.0;   // lo for kShift, hi for kNegShift
};

struct Tableau {
  // rows x (columns + 1); last column is the RHS.
  Eigen::MatrixXd t;
  std::vector<int> basis;        // basic variable per row
  Eigen::VectorXd obj;           // reduced-cost row
  double obj_value = 0.0;
  int rows = 0;
  int cols = 0;                  // structural + slack + artificial columns
  int first_artificial = 0;
  std::vector<bool> enterable;   // artificials barred in phase 2
  int pivots = 0;
  bool bland = false;
  int bland_after = 0;
  int hard_cap = 0;

  double& at(int i, int j) { return t(i, j); }
  double rhs(int i) const { return t(i, cols); }

  void pivot(int row, int col) {
    const double inv = 1.0 / t(row, col);
    t.row(row) *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == row) continue;
      const double factor = t(i, col);
      if (factor != 0.0) t.row(i) -= factor * t.row(row);
    }
    const double obj_factor = obj(col);
    if (obj_factor != 0.0) {
      obj -= obj_factor * t.row(row).head(cols);
      obj_value -= obj_factor * t(row, cols);
    }
    basis[row] = col;
    ++pivots;
    if (pivots > bland_after) bland = true;
    if (pivots > hard_cap) {
      throw NumericalFailureError("solve_lp: simplex cycling guard exceeded");
    }
  }

  // Maximization step. Returns false when optimal, throws on unbounded when
  // allow_unbounded is false... callers check the return enum instead.
  enum class StepResult { kOptimal, kPivoted, kUnbounded };

  StepResult step() {
    int enter = -1;
    if (!bland) {
      double best = -tol::kLpPivot;
      for (int j = 0; j < cols; ++j) {
        if (!enterable[j]) continue;
        if (obj(j) < best) {
          best = obj(j);
          enter = j;
        }
      }
    } else {
      for (int j = 0; j < cols; ++j) {
        if (enterable[j] && obj(j) < -tol::kLpPivot) {
          enter = j;
          break;
        }
      }
    }
    if (enter < 0) return StepResult::kOptimal;

    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double coeff = t(i, enter);
      if (coeff <= tol::kLpPivot) continue;
      const double ratio = t(i, cols) / coeff;
      if (leave < 0 || ratio < best_ratio - tol::kLpPivot ||
          (ratio < best_ratio + tol::kLpPivot && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) return StepResult::kUnbounded;
    pivot(leave, enter);
    return StepResult::kPivoted;
  }

  // Rebuilds the reduced-cost row for objective c (maximization).
  void load_objective(const Eigen::VectorXd& c) {
    obj = -c;
    obj_value = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double cb = basis[i] < c.size() ? c(basis[i]) : 0.0;
      if (cb != 0.0) {
        obj += cb * t.row(i).head(cols);
        obj_value += cb * t(i, cols);
      }
    }
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = lp.variable_count();
  if (lp.ineq_a.rows() != lp.ineq_b.size() || (lp.ineq_count() > 0 && lp.ineq_a.cols() != n) ||
      lp.eq_a.rows() != lp.eq_b.size() || (lp.eq_count() > 0 && lp.eq_a.cols() != n) ||
      lp.lower.size() != n || lp.upper.size() != n) {
    throw InvariantViolationError("solve_lp: inconsistent dimensions");
  }

  // Map variables onto nonnegative columns.
  std::vector<VariableMap> vmap(n);
  int columns = 0;
  int extra_bound_rows = 0;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower(j);
    const double hi = lp.upper(j);
    if (!(lo <= hi)) throw InvariantViolationError("solve_lp: empty variable bound");
    if (std::isfinite(lo)) {
      vmap[j] = {VariableMap::Kind::kShift, columns++, -1, lo};
      if (std::isfinite(hi)) ++extra_bound_rows;
    } else if (std::isfinite(hi)) {
      vmap[j] = {VariableMap::Kind::kNegShift, columns++, -1, hi};
    } else {
      vmap[j] = {VariableMap::Kind::kSplit, columns, columns + 1, 0.0};
      columns += 2;
    }
  }

  const int m_ineq = lp.ineq_count() + extra_bound_rows;
  const int m_eq = lp.eq_count();
  const int rows = m_ineq + m_eq;

  // Dense row-major assembly: structural columns, then one slack per
  // inequality row, then artificials as needed.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, columns);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  auto emit = [&](int row, int j, double coeff) {
    const VariableMap& vm = vmap[j];
    switch (vm.kind) {
      case VariableMap::Kind::kShift:
        a(row, vm.column) += coeff;
        b(row) -= coeff * vm.offset;
        break;
      case VariableMap::Kind::kNegShift:
        a(row, vm.column) -= coeff;
        b(row) -= coeff * vm.offset;
        break;
      case VariableMap::Kind::kSplit:
        a(row, vm.column) += coeff;
        a(row, vm.column_neg) -= coeff;
        break;
    }
  };

  int row = 0;
  for (int i = 0; i < lp.ineq_count(); ++i, ++row) {
    b(row) = lp.ineq_b(i);
    for (int j = 0; j < n; ++j) {
      const double coeff = lp.ineq_a(i, j);
      if (coeff != 0.0) emit(row, j, coeff);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (vmap[j].kind == VariableMap::Kind::kShift && std::isfinite(lp.upper(j))) {
      b(row) = lp.upper(j) - lp.lower(j);
      a(row, vmap[j].column) = 1.0;
      ++row;
    }
  }
  for (int i = 0; i < m_eq; ++i, ++row) {
    b(row) = lp.eq_b(i);
    for (int j = 0; j < n; ++j) {
      const double coeff = lp.eq_a(i, j);
      if (coeff != 0.0) emit(row, j, coeff);
    }
  }

  // Sign-normalize rows, add slacks and artificials.
  std::vector<bool> flipped(rows, false);
  for (int i = 0; i < rows; ++i) {
    if (b(i) < 0.0) {
      a.row(i) *= -1.0;
      b(i) = -b(i);
      flipped[i] = true;
    }
  }

  const int slack_base = columns;
  const int art_base = slack_base + m_ineq;
  std::vector<int> art_col(rows, -1);
  int art_count = 0;
  for (int i = 0; i < rows; ++i) {
    const bool is_ineq = i < m_ineq;
    const bool needs_artificial = !is_ineq || flipped[i];
    if (needs_artificial) art_col[i] = art_base + art_count++;
  }

  Tableau tab;
  tab.rows = rows;
  tab.cols = art_base + art_count;
  tab.first_artificial = art_base;
  tab.t = Eigen::MatrixXd::Zero(rows, tab.cols + 1);
  tab.t.block(0, 0, rows, columns) = a;
  tab.basis.assign(rows, -1);
  tab.enterable.assign(tab.cols, true);
  tab.bland_after = 200 + 20 * (rows + tab.cols);
  tab.hard_cap = 100000 + 50 * (rows + tab.cols);

  for (int i = 0; i < rows; ++i) {
    tab.t(i, tab.cols) = b(i);
    if (i < m_ineq) tab.t(i, slack_base + i) = flipped[i] ? -1.0 : 1.0;
    if (art_col[i] >= 0) {
      tab.t(i, art_col[i]) = 1.0;
      tab.basis[i] = art_col[i];
    } else {
      tab.basis[i] = slack_base + i;
    }
  }

  LpSolution solution;
  solution.dual_ineq = Eigen::VectorXd::Zero(lp.ineq_count());
  solution.dual_eq = Eigen::VectorXd::Zero(m_eq);

  // Phase 1: drive the artificials to zero.
  if (art_count > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.cols);
    for (int i = 0; i < rows; ++i) {
      if (art_col[i] >= 0) phase1(art_col[i]) = -1.0;
    }
    tab.load_objective(phase1);
    while (true) {
      const Tableau::StepResult r = tab.step();
      if (r == Tableau::StepResult::kOptimal) break;
      if (r == Tableau::StepResult::kUnbounded) {
        throw NumericalFailureError("solve_lp: phase 1 unbounded");
      }
    }
    if (tab.obj_value < -1e-7) {
      solution.status = LpStatus::kInfeasible;
      solution.pivots = tab.pivots;
      return solution;
    }
    // Pivot remaining artificials out of the basis; rows that cannot pivot
    // are redundant and get neutralized instead of deleted.
    for (int i = 0; i < rows; ++i) {
      if (tab.basis[i] < art_base) continue;
      int col = -1;
      for (int j = 0; j < art_base; ++j) {
        if (std::abs(tab.t(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        tab.t.row(i).setZero();
        tab.t(i, tab.basis[i]) = 1.0;
      }
    }
    for (int j = art_base; j < tab.cols; ++j) tab.enterable[j] = false;
  }

  // Phase 2 objective over the tableau columns. Constant offsets from the
  // variable shifts drop out: the reported value is recomputed from x.
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tab.cols);
  for (int j = 0; j < n; ++j) {
    const double c = lp.objective(j);
    if (c == 0.0) continue;
    const VariableMap& vm = vmap[j];
    switch (vm.kind) {
      case VariableMap::Kind::kShift:
        phase2(vm.column) += c;
        break;
      case VariableMap::Kind::kNegShift:
        phase2(vm.column) -= c;
        break;
      case VariableMap::Kind::kSplit:
        phase2(vm.column) += c;
        phase2(vm.column_neg) -= c;
        break;
    }
  }
  tab.load_objective(phase2);
  while (true) {
    const Tableau::StepResult r = tab.step();
    if (r == Tableau::StepResult::kOptimal) break;
    if (r == Tableau::StepResult::kUnbounded) {
      solution.status = LpStatus::kUnbounded;
      solution.pivots = tab.pivots;
      return solution;
    }
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(tab.cols);
  for (int i = 0; i < rows; ++i) u(tab.basis[i]) = tab.rhs(i);

  solution.x = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const VariableMap& vm = vmap[j];
    switch (vm.kind) {
      case VariableMap::Kind::kShift:
        solution.x(j) = vm.offset + u(vm.column);
        break;
      case VariableMap::Kind::kNegShift:
        solution.x(j) = vm.offset - u(vm.column);
        break;
      case VariableMap::Kind::kSplit:
        solution.x(j) = u(vm.column) - u(vm.column_neg);
        break;
    }
  }
  solution.value = lp.objective.dot(solution.x);
  solution.status = LpStatus::kOptimal;
  solution.pivots = tab.pivots;

  // Duals read off the reduced-cost row at each row's original identity
  // column (slack for inequalities, artificial for equalities; a flipped
  // equality negates).
  for (int i = 0; i < lp.ineq_count(); ++i) {
    solution.dual_ineq(i) = tab.obj(slack_base + i);
  }
  for (int i = 0; i < m_eq; ++i) {
    const int r = m_ineq + i;
    if (art_col[r] >= 0) {
      solution.dual_eq(i) = flipped[r] ? -tab.obj(art_col[r]) : tab.obj(art_col[r]);
    }
  }
  return solution;
}

// ---------------------------------------------------------------------------
// Conditional gradient with away steps
// ---------------------------------------------------------------------------

namespace {

double qp_objective(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  return qp.quad_diag.dot(x.cwiseProduct(x)) + qp.linear.dot(x) + qp.constant;
}

Eigen::VectorXd qp_gradient(const QuadraticProgram& qp, const Eigen::VectorXd& x) {
  return 2.0 * qp.quad_diag.cwiseProduct(x) + qp.linear;
}

Eigen::VectorXd linear_minimizer(const QuadraticProgram& qp, const Eigen::VectorXd& g) {
  LinearProgram lp;
  lp.objective = -g;
  lp.ineq_a = qp.ineq_a;
  lp.ineq_b = qp.ineq_b;
  lp.eq_a = qp.eq_a;
  lp.eq_b = qp.eq_b;
  lp.lower = qp.lower;
  lp.upper = qp.upper;
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw InvariantViolationError("solve_qp: feasible region is empty");
  }
  if (sol.status == LpStatus::kUnbounded) {
    throw InvariantViolationError("solve_qp: feasible region is unbounded");
  }
  return sol.x;
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, double gap_tol, int max_iterations) {
  const int n = qp.variable_count();
  for (int j = 0; j < n; ++j) {
    if (qp.quad_diag(j) < 0.0) {
      throw InvariantViolationError("solve_qp: quadratic diagonal must be >= 0");
    }
  }

  struct Atom {
    Eigen::VectorXd vertex;
    double weight;
  };
  std::vector<Atom> active;

  Eigen::VectorXd x = linear_minimizer(qp, qp.linear);
  active.push_back({x, 1.0});

  QpSolution out;
  out.x = x;
  out.value = qp_objective(qp, x);
  out.gap = std::numeric_limits<double>::infinity();

  double checkpoint_gap = std::numeric_limits<double>::infinity();
  auto find_atom = [&](const Eigen::VectorXd& v) -> int {
    for (std::size_t i = 0; i < active.size(); ++i) {
      if ((active[i].vertex - v).lpNorm<Eigen::Infinity>() <= 1e-12) {
        return static_cast<int>(i);
      }
    }
    return -1;
  };

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const Eigen::VectorXd g = qp_gradient(qp, x);
    const Eigen::VectorXd s = linear_minimizer(qp, g);
    const double fw_gap = g.dot(x - s);
    out.gap = std::min(out.gap, std::max(fw_gap, 0.0));

    const double value = qp_objective(qp, x);
    if (value < out.value) {
      out.value = value;
      out.x = x;
    }

    // The certified gap is a running minimum, so the checkpoint sequence is
    // non-increasing by construction; trip loudly if bookkeeping ever breaks.
    if (iter % 100 == 0) {
      if (out.gap > checkpoint_gap + tol::kAffine) {
        throw InvariantViolationError("solve_qp: duality-gap certificate increased");
      }
      checkpoint_gap = out.gap;
    }

    if (fw_gap <= gap_tol) {
      out.gap_satisfied = true;
      out.value = qp_objective(qp, x);
      out.x = x;
      break;
    }

    // Away atom: active vertex with the steepest ascent.
    int away = 0;
    double away_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i) {
      const double score = g.dot(active[i].vertex);
      if (score > away_score) {
        away_score = score;
        away = static_cast<int>(i);
      }
    }

    const double away_gap = away_score - g.dot(x);
    Eigen::VectorXd direction;
    double max_step = 0.0;
    bool away_step = false;
    if (fw_gap >= away_gap || active.size() == 1) {
      direction = s - x;
      max_step = 1.0;
    } else {
      direction = x - active[away].vertex;
      const double w = active[away].weight;
      max_step = w >= 1.0 ? 1.0 : w / (1.0 - w);
      away_step = true;
    }

    const double slope = g.dot(direction);
    if (slope >= 0.0) {
      // No descent available along the chosen direction; certificate stands.
      break;
    }
    const double curvature = qp.quad_diag.dot(direction.cwiseProduct(direction));
    double step = max_step;
    if (curvature > 0.0) step = std::min(max_step, -slope / (2.0 * curvature));

    x += step * direction;
    if (away_step) {
      for (Atom& atom : active) atom.weight *= (1.0 + step);
      active[away].weight -= step;
    } else {
      for (Atom& atom : active) atom.weight *= (1.0 - step);
      const int idx = find_atom(s);
      if (idx >= 0) {
        active[idx].weight += step;
      } else {
        active.push_back({s, step});
      }
    }
    std::erase_if(active, [](const Atom& atom) { return atom.weight <= 1e-14; });

    // Periodic re-synchronization keeps weight drift in check.
    if (iter % 256 == 255 && !active.empty()) {
      double total = 0.0;
      for (const Atom& atom : active) total += atom.weight;
      Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(n);
      for (Atom& atom : active) {
        atom.weight /= total;
        rebuilt += atom.weight * atom.vertex;
      }
      x = rebuilt;
    }
  }

  const double final_value = qp_objective(qp, x);
  if (final_value < out.value) {
    out.value = final_value;
    out.x = x;
  }
  out.gap_satisfied = out.gap <= gap_tol;
  out.iterations = iter;
  return out;
}

}  // namespace persuade
