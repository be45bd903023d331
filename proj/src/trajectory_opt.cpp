#include "rlss/rlss.hpp"

#include <cmath>
#include <stdexcept>

namespace rlss {

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

// Offset of piece j's first variable in the stacked control-point vector.
std::vector<int> piece_offsets(const RobotConfig& cfg, int d) {
    std::vector<int> off(cfg.piece_count + 1, 0);
    for (int j = 0; j < cfg.piece_count; ++j) off[j + 1] = off[j] + (cfg.degrees[j] + 1) * d;
    return off;
}

}  // namespace

Eigen::MatrixXd bernstein_gram(int m, double T) {
    Eigen::MatrixXd G(m + 1, m + 1);
    for (int a = 0; a <= m; ++a)
        for (int b = 0; b <= m; ++b)
            G(a, b) = T * binom(m, a) * binom(m, b) / ((2 * m + 1) * binom(2 * m, a + b));
    return G;
}

Eigen::MatrixXd hodograph_transform(int degree, double T, int order) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(degree + 1, degree + 1);
    int h = degree;
    for (int k = 0; k < order; ++k) {
        if (h == 0) return Eigen::MatrixXd::Zero(1, degree + 1);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(h, h + 1);
        for (int i = 0; i < h; ++i) {
            D(i, i) = -h / T;
            D(i, i + 1) = h / T;
        }
        M = D * M;
        --h;
    }
    return M;
}

QuadraticObjective build_objective(const DiscretePlan& plan, const RobotConfig& cfg) {
    cfg.validate();
    if (plan.num_segments() != cfg.piece_count)
        throw std::invalid_argument("build_objective: plan/config piece count mismatch");
    const int d = static_cast<int>(plan.waypoints.front().size());
    const auto off = piece_offsets(cfg, d);
    const int n = off.back();

    QuadraticObjective obj;
    obj.Q = Eigen::MatrixXd::Zero(n, n);
    obj.q = Eigen::VectorXd::Zero(n);

    for (int j = 0; j < cfg.piece_count; ++j) {
        const int h = cfg.degrees[j];
        const double T = plan.durations[j];
        if (T <= 0.0) throw std::invalid_argument("build_objective: non-positive piece duration");

        for (int order = 1; order <= static_cast<int>(cfg.energy_weights.size()); ++order) {
            double lambda = cfg.energy_weights[order - 1];
            if (lambda <= 0.0 || order > h) continue;
            Eigen::MatrixXd M = hodograph_transform(h, T, order);
            Eigen::MatrixXd W = M.transpose() * bernstein_gram(h - order, T) * M;
            for (int a = 0; a <= h; ++a)
                for (int b = 0; b <= h; ++b)
                    for (int s = 0; s < d; ++s)
                        obj.Q(off[j] + a * d + s, off[j] + b * d + s) += 2.0 * lambda * W(a, b);
        }

        double theta = cfg.deviation_weights[j];
        if (theta > 0.0) {
            const Vec& target = plan.segment_end(j);
            for (int s = 0; s < d; ++s) {
                int idx = off[j] + h * d + s;
                obj.Q(idx, idx) += 2.0 * theta;
                obj.q(idx) += -2.0 * theta * target(s);
            }
        }
    }
    return obj;
}

TrajectoryQp build_constraints(const DiscretePlan& plan, const SafeCorridor& corridor,
                               const RobotConfig& cfg, const std::vector<Vec>& initial_derivatives,
                               ConstraintMode mode) {
    if (corridor.num_pieces() != cfg.piece_count)
        throw std::invalid_argument("build_constraints: corridor/config piece count mismatch");
    if (static_cast<int>(initial_derivatives.size()) != cfg.continuity + 1)
        throw std::invalid_argument("build_constraints: need derivatives 0..c");

    const int d = static_cast<int>(plan.waypoints.front().size());
    const int L = cfg.piece_count;
    const auto off = piece_offsets(cfg, d);
    const int nc = off.back();

    // One slack per soft half-space (obstacle/robot provenance only).
    int slacks = 0;
    std::vector<std::vector<int>> slack_of(L);
    if (mode == ConstraintMode::soft) {
        for (int j = 0; j < L; ++j) {
            slack_of[j].assign(corridor.pieces[j].size(), -1);
            for (size_t k = 0; k < corridor.pieces[j].size(); ++k)
                if (corridor.pieces[j][k].kind != HyperplaneKind::workspace)
                    slack_of[j][k] = nc + slacks++;
        }
    }
    const int n = nc + slacks;

    QuadraticObjective obj = build_objective(plan, cfg);
    TrajectoryQp out;
    out.control_vars = nc;
    out.slack_vars = slacks;
    out.qp = QpProblem::zero(n);
    out.qp.Q.topLeftCorner(nc, nc) = obj.Q;
    out.qp.q.head(nc) = obj.q;
    const double alpha = cfg.soft_penalty();
    for (int s = 0; s < slacks; ++s) out.qp.Q(nc + s, nc + s) = 2.0 * alpha;

    // Equalities: initial derivatives of piece 1, then junction continuity.
    const int num_eq = (cfg.continuity + 1) * d * L;
    out.qp.A_eq = Eigen::MatrixXd::Zero(num_eq, n);
    out.qp.b_eq = Eigen::VectorXd::Zero(num_eq);
    int row = 0;
    for (int k = 0; k <= cfg.continuity; ++k) {
        Eigen::MatrixXd M = hodograph_transform(cfg.degrees[0], plan.durations[0], k);
        for (int s = 0; s < d; ++s, ++row) {
            for (int a = 0; a < M.cols(); ++a) out.qp.A_eq(row, off[0] + a * d + s) = M(0, a);
            out.qp.b_eq(row) = initial_derivatives[k](s);
        }
    }
    for (int j = 0; j + 1 < L; ++j) {
        for (int k = 0; k <= cfg.continuity; ++k) {
            Eigen::MatrixXd Ml = hodograph_transform(cfg.degrees[j], plan.durations[j], k);
            Eigen::MatrixXd Mr = hodograph_transform(cfg.degrees[j + 1], plan.durations[j + 1], k);
            for (int s = 0; s < d; ++s, ++row) {
                for (int a = 0; a < Ml.cols(); ++a)
                    out.qp.A_eq(row, off[j] + a * d + s) = Ml(Ml.rows() - 1, a);
                for (int a = 0; a < Mr.cols(); ++a)
                    out.qp.A_eq(row, off[j + 1] + a * d + s) -= Mr(0, a);
            }
        }
    }

    // Inequalities: every control point of piece j inside polytope j, plus
    // slack nonnegativity in soft mode.
    int num_in = 0;
    for (int j = 0; j < L; ++j)
        num_in += static_cast<int>(corridor.pieces[j].size()) * (cfg.degrees[j] + 1);
    num_in += slacks;
    out.qp.A_in = Eigen::MatrixXd::Zero(num_in, n);
    out.qp.b_in = Eigen::VectorXd::Zero(num_in);
    row = 0;
    for (int j = 0; j < L; ++j) {
        for (size_t k = 0; k < corridor.pieces[j].size(); ++k) {
            const auto& ch = corridor.pieces[j][k];
            int slack = mode == ConstraintMode::soft ? slack_of[j][k] : -1;
            for (int a = 0; a <= cfg.degrees[j]; ++a, ++row) {
                for (int s = 0; s < d; ++s)
                    out.qp.A_in(row, off[j] + a * d + s) = ch.plane.normal(s);
                out.qp.b_in(row) = -ch.plane.offset;
                if (slack >= 0) out.qp.A_in(row, slack) = -1.0;
            }
        }
    }
    for (int s = 0; s < slacks; ++s, ++row) out.qp.A_in(row, nc + s) = -1.0;

    return out;
}

PiecewiseTrajectory extract_trajectory(const DiscretePlan& plan, const RobotConfig& cfg,
                                       const Eigen::VectorXd& x) {
    const int d = static_cast<int>(plan.waypoints.front().size());
    const auto off = piece_offsets(cfg, d);
    PiecewiseTrajectory traj;
    traj.pieces.reserve(cfg.piece_count);
    for (int j = 0; j < cfg.piece_count; ++j) {
        BezierPiece piece;
        piece.duration = plan.durations[j];
        for (int a = 0; a <= cfg.degrees[j]; ++a)
            piece.control_points.push_back(x.segment(off[j] + a * d, d));
        traj.pieces.push_back(std::move(piece));
    }
    return traj;
}

}  // namespace rlss
