#pragma once

#include <Eigen/Dense>

namespace rlss {

// Convex quadratic program
//   minimize    0.5 x^T Q x + q^T x
//   subject to  A_eq x  = b_eq
//               A_in x <= b_in
// Q must be symmetric positive semidefinite.
struct QpProblem {
    Eigen::MatrixXd Q;
    Eigen::VectorXd q;
    Eigen::MatrixXd A_eq;  // p x n (may have 0 rows)
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;  // m x n (may have 0 rows)
    Eigen::VectorXd b_in;

    int num_vars() const { return static_cast<int>(q.size()); }
    int num_eq() const { return static_cast<int>(b_eq.size()); }
    int num_in() const { return static_cast<int>(b_in.size()); }

    // Problem with n variables and no constraints yet.
    static QpProblem zero(int n);
};

enum class QpStatus { optimal, infeasible, max_iterations };

const char* to_string(QpStatus s);

struct QpSolution {
    Eigen::VectorXd x;
    QpStatus status = QpStatus::max_iterations;
    double objective = 0.0;      // 0.5 x^T Q x + q^T x at the returned x
    double max_violation = 0.0;  // worst constraint residual at the returned x
    int iterations = 0;
};

// Solver feasibility tolerance (KKT residuals at an optimal solution).
inline constexpr double kQpFeasTol = 1e-6;

// Dual active-set solve (Goldfarb-Idnani). Deterministic: identical inputs
// produce identical outputs. On infeasible problems the verdict is confirmed
// by a phase-1 subproblem minimizing total constraint violation; infeasible
// is reported when that minimum exceeds 1e-5.
// Throws std::invalid_argument on inconsistent dimensions, asymmetric Q, or
// Q failing the PSD check (Cholesky of Q + 1e-9 I).
QpSolution solve(const QpProblem& p);

// True iff every constraint of p holds at x within tol.
bool is_feasible_point(const QpProblem& p, const Eigen::VectorXd& x, double tol = kQpFeasTol);

// Worst constraint residual of p at x (0 when strictly feasible).
double max_constraint_violation(const QpProblem& p, const Eigen::VectorXd& x);

}  // namespace rlss
