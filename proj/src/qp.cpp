#include "rlss/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rlss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRegularization = 1e-9;   // added to diag(Q) before factorization
constexpr double kPhase1Threshold = 1e-5;  // min total violation above which we call it infeasible

// State of the Goldfarb-Idnani dual active-set iteration. Constraints are held
// in the classical form n^T x + c >= 0 (or = 0) with normals as columns of the
// implicit active-set factorization G = L L^T, J = L^{-T} Q_rot.
struct GiWork {
    Eigen::MatrixXd J;
    Eigen::MatrixXd R;
    Eigen::VectorXd d, z, r, u;
    Eigen::VectorXi active;  // active constraint ids; equality i stored as -i-1
    double R_norm = 1.0;
    int iq = 0;  // active set size
};

void compute_d(GiWork& w, const Eigen::VectorXd& np) { w.d.noalias() = w.J.transpose() * np; }

void update_z(GiWork& w, int n) {
    if (w.iq == n)
        w.z.setZero();
    else
        w.z.noalias() = w.J.rightCols(n - w.iq) * w.d.tail(n - w.iq);
}

void update_r(GiWork& w) {
    for (int i = w.iq - 1; i >= 0; --i) {
        double sum = w.d(i);
        for (int k = i + 1; k < w.iq; ++k) sum -= w.R(i, k) * w.r(k);
        w.r(i) = sum / w.R(i, i);
    }
}

// Rotates d into the leading iq+1 components and extends R by one column.
// Returns false when the new normal is linearly dependent on the active set.
bool add_constraint(GiWork& w, int n) {
    for (int j = n - 1; j >= w.iq + 1; --j) {
        double cc = w.d(j - 1);
        double ss = w.d(j);
        double h = std::hypot(cc, ss);
        if (h == 0.0) continue;
        w.d(j) = 0.0;
        ss /= h;
        cc /= h;
        if (cc < 0.0) {
            cc = -cc;
            ss = -ss;
            w.d(j - 1) = -h;
        } else {
            w.d(j - 1) = h;
        }
        double xny = ss / (1.0 + cc);
        for (int k = 0; k < n; ++k) {
            double t1 = w.J(k, j - 1);
            double t2 = w.J(k, j);
            w.J(k, j - 1) = t1 * cc + t2 * ss;
            w.J(k, j) = xny * (t1 + w.J(k, j - 1)) - t2;
        }
    }
    ++w.iq;
    for (int i = 0; i < w.iq; ++i) w.R(i, w.iq - 1) = w.d(i);
    if (std::abs(w.d(w.iq - 1)) <= kEps * w.R_norm) return false;
    w.R_norm = std::max(w.R_norm, std::abs(w.d(w.iq - 1)));
    return true;
}

// Removes active constraint with id l (an inequality) and restores R.
void delete_constraint(GiWork& w, int n, int p, int l) {
    int qq = -1;
    for (int i = p; i < w.iq; ++i)
        if (w.active(i) == l) {
            qq = i;
            break;
        }
    for (int i = qq; i < w.iq - 1; ++i) {
        w.active(i) = w.active(i + 1);
        w.u(i) = w.u(i + 1);
        w.R.col(i) = w.R.col(i + 1);
    }
    // The candidate constraint's accumulated dual lives at slot iq; it moves
    // into the freed slot so the dual iteration keeps its progress.
    w.active(w.iq - 1) = w.active(w.iq);
    w.u(w.iq - 1) = w.u(w.iq);
    w.active(w.iq) = 0;
    w.u(w.iq) = 0.0;
    --w.iq;
    if (w.iq == 0) return;
    for (int j = qq; j < w.iq; ++j) {
        double cc = w.R(j, j);
        double ss = w.R(j + 1, j);
        double h = std::hypot(cc, ss);
        if (h == 0.0) continue;
        cc /= h;
        ss /= h;
        w.R(j + 1, j) = 0.0;
        if (cc < 0.0) {
            w.R(j, j) = -h;
            cc = -cc;
            ss = -ss;
        } else {
            w.R(j, j) = h;
        }
        double xny = ss / (1.0 + cc);
        for (int k = j + 1; k < w.iq; ++k) {
            double t1 = w.R(j, k);
            double t2 = w.R(j + 1, k);
            w.R(j, k) = t1 * cc + t2 * ss;
            w.R(j + 1, k) = xny * (t1 + w.R(j, k)) - t2;
        }
        for (int k = 0; k < n; ++k) {
            double t1 = w.J(k, j);
            double t2 = w.J(k, j + 1);
            w.J(k, j) = t1 * cc + t2 * ss;
            w.J(k, j + 1) = xny * (w.J(k, j) + t1) - t2;
        }
    }
}

enum class GiStatus { optimal, infeasible, iterations };

// Core dual active-set loop. Solves
//   min 0.5 x^T G x + g0^T x  s.t.  A_eq x = b_eq, A_in x <= b_in
// with G positive definite (caller regularizes). Deterministic: violated
// constraints and blocking duals are chosen by fixed scan order.
GiStatus gi_solve(const Eigen::MatrixXd& G, const Eigen::VectorXd& g0, const Eigen::MatrixXd& A_eq,
                  const Eigen::VectorXd& b_eq, const Eigen::MatrixXd& A_in,
                  const Eigen::VectorXd& b_in, int max_iter, Eigen::VectorXd& x, int& iters) {
    const int n = static_cast<int>(g0.size());
    const int p = static_cast<int>(b_eq.size());
    const int m = static_cast<int>(b_in.size());

    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("qp::solve: Q + reg*I is not positive definite");

    GiWork w;
    w.J = llt.matrixL().transpose().solve(Eigen::MatrixXd::Identity(n, n));
    w.R = Eigen::MatrixXd::Zero(n, n);
    w.d.resize(n);
    w.z.resize(n);
    w.r = Eigen::VectorXd::Zero(p + m + 1);
    w.u = Eigen::VectorXd::Zero(p + m + 1);
    w.active = Eigen::VectorXi::Zero(p + m + 1);

    x = -llt.solve(g0);
    iters = 0;

    // Force the equality constraints into the active set.
    for (int i = 0; i < p; ++i) {
        Eigen::VectorXd np = A_eq.row(i).transpose();
        compute_d(w, np);
        update_z(w, n);
        update_r(w);
        double t2 = 0.0;
        if (w.z.squaredNorm() > kEps * kEps) t2 = (b_eq(i) - np.dot(x)) / w.z.dot(np);
        x += t2 * w.z;
        w.u.head(w.iq) -= t2 * w.r.head(w.iq);
        w.u(w.iq) = t2;
        w.active(w.iq) = -i - 1;
        if (!add_constraint(w, n)) {
            // Dependent equality: consistent duplicates are skipped, anything
            // else makes the equality system unsolvable.
            if (std::abs(np.dot(x) - b_eq(i)) > 1e-8 * (1.0 + std::abs(b_eq(i))))
                return GiStatus::infeasible;
            --w.iq;
        }
    }

    Eigen::VectorXd s(m);
    std::vector<bool> inactive(m, true);

    while (true) {
        if (++iters > max_iter) return GiStatus::iterations;

        // Step 1: pick the most violated inactive inequality (ties: lowest index).
        for (int i = 0; i < m; ++i) {
            s(i) = b_in(i) - A_in.row(i).dot(x);  // >= 0 when satisfied
            inactive[i] = true;
        }
        for (int i = p; i < w.iq; ++i) inactive[w.active(i)] = false;

        int ip = -1;
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            if (!inactive[i]) continue;
            if (s(i) < worst) {
                worst = s(i);
                ip = i;
            }
        }
        if (ip < 0) return GiStatus::optimal;
        if (worst >= -1e-9 * (1.0 + std::abs(b_in(ip)))) return GiStatus::optimal;

        Eigen::VectorXd np = -A_in.row(ip).transpose();
        w.u(w.iq) = 0.0;

        while (true) {
            if (++iters > max_iter) return GiStatus::iterations;
            compute_d(w, np);
            update_z(w, n);
            update_r(w);

            // Max dual step before an active inequality's multiplier hits zero.
            double t1 = kInf;
            int l = -1;
            for (int k = p; k < w.iq; ++k) {
                if (w.r(k) > 0.0 && w.u(k) / w.r(k) < t1) {
                    t1 = w.u(k) / w.r(k);
                    l = w.active(k);
                }
            }
            // Primal step that makes constraint ip tight.
            double t2 = kInf;
            bool z_nonzero = w.z.squaredNorm() > kEps * kEps;
            if (z_nonzero) t2 = -s(ip) / w.z.dot(np);

            if (t1 >= kInf && t2 >= kInf) return GiStatus::infeasible;

            if (!z_nonzero) {
                // Dual-only step: drop the blocking constraint, stay put.
                w.u.head(w.iq) -= t1 * w.r.head(w.iq);
                w.u(w.iq) += t1;
                inactive[l] = true;
                delete_constraint(w, n, p, l);
                continue;
            }

            double t = std::min(t1, t2);
            x += t * w.z;
            w.u.head(w.iq) -= t * w.r.head(w.iq);
            w.u(w.iq) += t;

            if (t2 <= t1) {
                // Full step: constraint ip becomes active.
                if (!add_constraint(w, n)) {
                    // Unreachable in exact arithmetic when z != 0; bail out
                    // rather than risk a corrupted factorization.
                    --w.iq;
                    return GiStatus::iterations;
                }
                w.active(w.iq - 1) = ip;
                inactive[ip] = false;
                break;
            }

            // Partial step: drop the blocking constraint and keep going.
            inactive[l] = true;
            delete_constraint(w, n, p, l);
            s(ip) = b_in(ip) - A_in.row(ip).dot(x);
        }
    }
}

void check_inputs(const QpProblem& p) {
    const int n = p.num_vars();
    if (p.Q.rows() != n || p.Q.cols() != n)
        throw std::invalid_argument("qp::solve: Q dimension mismatch");
    if (p.num_eq() > 0 && (p.A_eq.rows() != p.num_eq() || p.A_eq.cols() != n))
        throw std::invalid_argument("qp::solve: equality constraint dimension mismatch");
    if (p.num_in() > 0 && (p.A_in.rows() != p.num_in() || p.A_in.cols() != n))
        throw std::invalid_argument("qp::solve: inequality constraint dimension mismatch");
    double asym = p.Q.size() > 0 ? (p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-9) throw std::invalid_argument("qp::solve: Q is not symmetric");
}

int iteration_cap(int n, int cons) { return 10 * (n + cons) + 1000; }

QpSolution finish(const QpProblem& p, Eigen::VectorXd x, QpStatus status, int iters) {
    QpSolution sol;
    sol.x = std::move(x);
    sol.status = status;
    sol.iterations = iters;
    if (sol.x.size() == p.num_vars() && p.num_vars() > 0) {
        sol.objective = 0.5 * sol.x.dot(p.Q * sol.x) + p.q.dot(sol.x);
        sol.max_violation = max_constraint_violation(p, sol.x);
    }
    return sol;
}

// Minimize total constraint violation:
//   min ||A_eq x - b_eq||^2 + ||t||^2  s.t.  A_in x - t <= b_in, t >= 0
// Always feasible; used to confirm infeasibility verdicts.
QpSolution solve_phase1(const QpProblem& p) {
    const int n = p.num_vars();
    const int m = p.num_in();
    QpProblem ph = QpProblem::zero(n + m);
    ph.Q.topLeftCorner(n, n) = 2.0 * kRegularization * Eigen::MatrixXd::Identity(n, n);
    if (p.num_eq() > 0) {
        ph.Q.topLeftCorner(n, n) += 2.0 * p.A_eq.transpose() * p.A_eq;
        ph.q.head(n) = -2.0 * p.A_eq.transpose() * p.b_eq;
    }
    if (m > 0) {
        ph.Q.bottomRightCorner(m, m) = 2.0 * Eigen::MatrixXd::Identity(m, m);
        ph.A_in = Eigen::MatrixXd::Zero(2 * m, n + m);
        ph.b_in = Eigen::VectorXd::Zero(2 * m);
        ph.A_in.topLeftCorner(m, n) = p.A_in;
        ph.A_in.topRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
        ph.b_in.head(m) = p.b_in;
        ph.A_in.bottomRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
    }

    Eigen::MatrixXd G = ph.Q + kRegularization * Eigen::MatrixXd::Identity(n + m, n + m);
    Eigen::VectorXd y;
    int iters = 0;
    GiStatus st = gi_solve(G, ph.q, ph.A_eq, ph.b_eq, ph.A_in, ph.b_in,
                           iteration_cap(n + m, 2 * m), y, iters);
    QpSolution sol;
    sol.iterations = iters;
    sol.status = st == GiStatus::optimal ? QpStatus::optimal : QpStatus::max_iterations;
    if (st == GiStatus::optimal) sol.x = y.head(n);
    return sol;
}

}  // namespace

QpProblem QpProblem::zero(int n) {
    QpProblem p;
    p.Q = Eigen::MatrixXd::Zero(n, n);
    p.q = Eigen::VectorXd::Zero(n);
    p.A_eq = Eigen::MatrixXd::Zero(0, n);
    p.b_eq = Eigen::VectorXd::Zero(0);
    p.A_in = Eigen::MatrixXd::Zero(0, n);
    p.b_in = Eigen::VectorXd::Zero(0);
    return p;
}

const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        case QpStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

double max_constraint_violation(const QpProblem& p, const Eigen::VectorXd& x) {
    double v = 0.0;
    if (p.num_eq() > 0) v = (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff();
    if (p.num_in() > 0) v = std::max(v, (p.A_in * x - p.b_in).maxCoeff());
    return std::max(v, 0.0);
}

bool is_feasible_point(const QpProblem& p, const Eigen::VectorXd& x, double tol) {
    if (x.size() != p.num_vars())
        throw std::invalid_argument("is_feasible_point: dimension mismatch");
    return max_constraint_violation(p, x) <= tol;
}

QpSolution solve(const QpProblem& p) {
    check_inputs(p);
    const int n = p.num_vars();
    Eigen::MatrixXd G = p.Q + kRegularization * Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd x;
    int iters = 0;
    GiStatus st = gi_solve(G, p.q, p.A_eq, p.b_eq, p.A_in, p.b_in,
                           iteration_cap(n, p.num_eq() + p.num_in()), x, iters);

    if (st == GiStatus::optimal) {
        QpSolution sol = finish(p, std::move(x), QpStatus::optimal, iters);
        if (sol.max_violation > kQpFeasTol) sol.status = QpStatus::max_iterations;
        return sol;
    }
    if (st == GiStatus::iterations) return finish(p, std::move(x), QpStatus::max_iterations, iters);

    // The dual iteration certified infeasibility; confirm with the phase-1
    // violation-minimizing subproblem before reporting it upstream.
    QpSolution ph = solve_phase1(p);
    if (ph.status == QpStatus::optimal && max_constraint_violation(p, ph.x) <= kPhase1Threshold)
        return finish(p, ph.x, QpStatus::max_iterations, iters + ph.iterations);

    QpSolution sol;
    sol.status = QpStatus::infeasible;
    sol.iterations = iters + ph.iterations;
    sol.x = Eigen::VectorXd::Zero(n);
    return sol;
}

}  // namespace rlss
