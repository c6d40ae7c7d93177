#pragma once

#include <Eigen/Dense>
#include <limits>

#include "persuade/types.hpp"

namespace persuade {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// max objective.x  s.t.  ineq_a x <= ineq_b,  eq_a x = eq_b,  lower <= x <= upper.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd ineq_a;
  Eigen::VectorXd ineq_b;
  Eigen::MatrixXd eq_a;
  Eigen::VectorXd eq_b;
  Eigen::VectorXd lower;  // may be -inf
  Eigen::VectorXd upper;  // may be +inf

  int variable_count() const { return static_cast<int>(objective.size()); }
  int ineq_count() const { return static_cast<int>(ineq_b.size()); }
  int eq_count() const { return static_cast<int>(eq_b.size()); }

  // Zero-initialized program with bounds [0, +inf).
  static LinearProgram zeros(int vars, int ineqs, int eqs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = 0.0;
  // Multipliers for the original inequality/equality rows, valid at optimum:
  // value == dual_ineq . ineq_b + dual_eq . eq_b + bound terms, dual_ineq >= 0.
  Eigen::VectorXd dual_ineq;
  Eigen::VectorXd dual_eq;
  int pivots = 0;
};

// Dense two-phase tableau simplex. Dantzig pricing with a permanent switch to
// Bland's rule once the pivot count passes the anti-cycling threshold; an
// exhausted hard cap raises NumericalFailureError. Intended for the dense
// regime (at most a couple thousand rows/columns).
LpSolution solve_lp(const LinearProgram& lp);

// min sum_i quad_diag_i x_i^2 + linear.x + constant over the same constraint
// structure as LinearProgram. quad_diag must be >= 0.
struct QuadraticProgram {
  Eigen::VectorXd quad_diag;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd ineq_a;
  Eigen::VectorXd ineq_b;
  Eigen::MatrixXd eq_a;
  Eigen::VectorXd eq_b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int variable_count() const { return static_cast<int>(quad_diag.size()); }

  static QuadraticProgram zeros(int vars, int ineqs, int eqs);
};

struct QpSolution {
  Eigen::VectorXd x;
  double value = 0.0;
  double gap = 0.0;         // best certified duality gap
  bool gap_satisfied = false;
  int iterations = 0;
};

// Conditional gradient with away steps; every linear subproblem goes through
// solve_lp. Stops when the Frank-Wolfe duality gap certificate drops below
// gap_tol; at the iteration cap the best iterate is returned with
// gap_satisfied = false. The feasible region must be nonempty and bounded.
QpSolution solve_qp(const QuadraticProgram& qp, double gap_tol = tol::kQpGap,
                    int max_iterations = 100000);

}  // namespace persuade
